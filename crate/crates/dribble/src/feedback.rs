//! PI + command reference velocity.
//!
//! `v_ref = k_p (v_ball − v_robot) + k_i ∫(v_ball − v_robot) + k_cmd (v_ball − cmd)`
//!
//! With the robot at rest and no command the reference is `1.5·v_ball`, so the
//! body is asked to outrun the ball and get in front of it.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::Vec2;

/// Anti-windup limit on each integral axis, metres.
pub const INTEGRAL_CLAMP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedbackGains {
    pub k_p: f64,
    pub k_i: f64,
    pub k_cmd: f64,
}

impl Default for FeedbackGains {
    fn default() -> Self {
        Self { k_p: 0.5, k_i: 4.0, k_cmd: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeedbackState {
    pub integral: Vec2,
    pub gains: FeedbackGains,
}

impl FeedbackState {
    pub fn new(gains: FeedbackGains) -> Self {
        Self { integral: Vec2::zeros(), gains }
    }

    pub fn accumulate(&self, ball_vel: Vec2, robot_vel: Vec2, dt: f64) -> Result<Self> {
        ensure_finite("accumulate inputs", &[ball_vel.x, ball_vel.y, robot_vel.x, robot_vel.y, dt])?;
        if dt < 0.0 {
            return Err(Error::InvalidInput(format!("dt must be non-negative, got {dt}")));
        }
        let raw = self.integral + (ball_vel - robot_vel) * dt;
        Ok(Self { integral: raw.map(|v| v.clamp(-INTEGRAL_CLAMP, INTEGRAL_CLAMP)), gains: self.gains })
    }

    pub fn compute_reference(&self, ball_vel: Vec2, robot_vel: Vec2, cmd: Vec2) -> Vec2 {
        let g = &self.gains;
        g.k_p * (ball_vel - robot_vel) + g.k_i * self.integral + g.k_cmd * (ball_vel - cmd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn accumulate_examples() {
        let s = FeedbackState::default();
        assert_eq!(s.accumulate(v(1.0, 0.0), v(1.0, 0.0), 0.02).unwrap().integral, v(0.0, 0.0));
        assert_eq!(s.accumulate(v(1.0, 0.0), v(0.0, 0.0), 0.02).unwrap().integral, v(0.02, 0.0));
        let near = FeedbackState { integral: v(0.49, 0.0), ..s };
        assert_eq!(near.accumulate(v(1.0, 0.0), v(0.0, 0.0), 1.0).unwrap().integral, v(0.5, 0.0));
        assert!(s.accumulate(v(1.0, 0.0), v(0.0, 0.0), -0.1).is_err());
    }

    #[test]
    fn reference_examples() {
        let s = FeedbackState::default();
        assert_eq!(s.compute_reference(Vec2::zeros(), Vec2::zeros(), Vec2::zeros()), Vec2::zeros());
        let r = s.compute_reference(v(1.0, 0.0), v(0.0, 0.0), v(-1.0, 0.0));
        assert!((r - v(2.5, 0.0)).norm() < 1e-12);
        let held = FeedbackState { integral: v(0.05, 0.0), ..s };
        let r = held.compute_reference(v(0.6, 0.0), v(0.6, 0.0), Vec2::zeros());
        assert!((r - v(0.8, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inverse_response() {
        let r = FeedbackState::default().compute_reference(v(1.0, 0.0), Vec2::zeros(), v(-1.0, 0.0));
        assert!(r.x > 0.0);
    }

    fn vec() -> impl Strategy<Value = Vec2> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| v(x, y))
    }

    proptest! {
        #[test]
        fn overshoot(b in vec()) {
            prop_assume!(b.norm() > 1e-6);
            let r = FeedbackState::default().compute_reference(b, Vec2::zeros(), Vec2::zeros());
            prop_assert!((r.norm() - 1.5 * b.norm()).abs() < 1e-12);
            prop_assert!(r.norm() > b.norm());
        }

        #[test]
        fn superposition(b1 in vec(), r1 in vec(), c1 in vec(), i1 in vec(),
                         b2 in vec(), r2 in vec(), c2 in vec(), i2 in vec(), a in -2.0..2.0f64) {
            let g = FeedbackGains::default();
            let f = |b: Vec2, r: Vec2, c: Vec2, i: Vec2| {
                FeedbackState { integral: i, gains: g }.compute_reference(b, r, c)
            };
            let lhs = f(b1 + a * b2, r1 + a * r2, c1 + a * c2, i1 + a * i2);
            let rhs = f(b1, r1, c1, i1) + a * f(b2, r2, c2, i2);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn equilibrium(b in vec()) {
            let r = FeedbackState::default().compute_reference(b, b, b);
            prop_assert_eq!(r, Vec2::zeros());
        }

        #[test]
        fn integral_stays_clamped(i in vec(), b in vec(), r in vec(), dt in 0.0..2.0f64) {
            let s = FeedbackState { integral: i.map(|x| x.clamp(-0.5, 0.5)), ..Default::default() };
            let out = s.accumulate(b, r, dt).unwrap();
            prop_assert!(out.integral.x.abs() <= INTEGRAL_CLAMP && out.integral.y.abs() <= INTEGRAL_CLAMP);
        }
    }
}
