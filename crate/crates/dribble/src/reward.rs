//! Base task rewards and guidance shaping.
//!
//! `r' = exp(−Δp_feet/σ) · (r + exp(−‖v − v_ref‖))`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardParams {
    pub sigma_task: f64,
    pub sigma_prox: f64,
    /// Foot deviation scale of the shaping gate, metres.
    pub sigma: f64,
    pub w_proximity: f64,
    pub w_facing: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self { sigma_task: 0.25, sigma_prox: 1.0, sigma: 0.02, w_proximity: 0.3, w_facing: 0.3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RewardBreakdown {
    pub task: f64,
    pub proximity: f64,
    pub facing: f64,
    pub base_total: f64,
    pub shaped_total: f64,
}

pub fn task_reward(ball_vel: Vec2, cmd: Vec2, sigma_task: f64) -> f64 {
    (-(ball_vel - cmd).norm_squared() / sigma_task).exp()
}

pub fn proximity_reward(robot_pos: Vec2, ball_pos: Vec2, sigma_prox: f64) -> f64 {
    (-(robot_pos - ball_pos).norm_squared() / sigma_prox).exp()
}

pub fn facing_reward(body_yaw: f64, robot_pos: Vec2, ball_pos: Vec2) -> Result<f64> {
    let to_ball = ball_pos - robot_pos;
    let d = to_ball.norm();
    if d == 0.0 || !d.is_finite() {
        return Err(Error::InvalidInput("facing reward needs distinct robot and ball positions".into()));
    }
    let heading = Vec2::new(body_yaw.cos(), body_yaw.sin());
    Ok((heading.dot(&to_ball) / d).max(0.0))
}

pub fn shape_reward(base: f64, body_vel: Vec2, v_ref: Vec2, dp_feet: f64, sigma: f64) -> Result<f64> {
    if dp_feet < 0.0 || dp_feet.is_nan() {
        return Err(Error::InvalidInput(format!("foot deviation must be non-negative, got {dp_feet}")));
    }
    Ok((-dp_feet / sigma).exp() * (base + (-(body_vel - v_ref).norm()).exp()))
}

impl RewardParams {
    /// Base rewards plus the shaped total. Facing counts as zero when the
    /// robot stands exactly on the ball.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        &self,
        ball_pos: Vec2,
        ball_vel: Vec2,
        cmd: Vec2,
        robot_pos: Vec2,
        body_yaw: f64,
        body_vel: Vec2,
        v_ref: Vec2,
        dp_feet: f64,
    ) -> Result<RewardBreakdown> {
        let task = task_reward(ball_vel, cmd, self.sigma_task);
        let proximity = proximity_reward(robot_pos, ball_pos, self.sigma_prox);
        let facing = facing_reward(body_yaw, robot_pos, ball_pos).unwrap_or(0.0);
        let base_total = task + self.w_proximity * proximity + self.w_facing * facing;
        let shaped_total = shape_reward(base_total, body_vel, v_ref, dp_feet, self.sigma)?;
        Ok(RewardBreakdown { task, proximity, facing, base_total, shaped_total })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, FRAC_PI_2, PI};

    const S: f64 = 0.02;

    #[test]
    fn base_examples() {
        let c = Vec2::new(1.0, 0.0);
        assert_eq!(task_reward(c, c, 0.25), 1.0);
        assert!((task_reward(Vec2::new(1.5, 0.0), c, 0.25) - 1.0 / E).abs() < 1e-12);
        assert!(task_reward(Vec2::new(100.0, 0.0), c, 0.25) < 1e-300);

        let o = Vec2::zeros();
        assert_eq!(proximity_reward(o, o, 1.0), 1.0);
        assert!((proximity_reward(o, Vec2::new(1.0, 0.0), 1.0) - 1.0 / E).abs() < 1e-12);
        assert!((proximity_reward(o, Vec2::new(0.0, 3.0), 1.0) - (-9.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn facing_examples() {
        let o = Vec2::zeros();
        let b = Vec2::new(1.0, 0.0);
        assert!((facing_reward(0.0, o, b).unwrap() - 1.0).abs() < 1e-12);
        assert!(facing_reward(FRAC_PI_2, o, b).unwrap().abs() < 1e-12);
        assert_eq!(facing_reward(PI, o, b).unwrap(), 0.0);
        assert!(facing_reward(0.0, o, o).is_err());
    }

    #[test]
    fn shaping_examples() {
        let v = Vec2::new(0.3, -0.2);
        assert_eq!(shape_reward(1.0, v, v, 0.0, S).unwrap(), 2.0);
        let r = shape_reward(0.5, Vec2::new(1.0, 0.0), Vec2::zeros(), 0.02, S).unwrap();
        assert!((r - (-1.0f64).exp() * (0.5 + (-1.0f64).exp())).abs() < 1e-12);
        assert!((r - 0.31927).abs() < 1e-5);
        assert!(shape_reward(0.7, v, v, 10.0, S).unwrap() < 1e-200);
        assert!(shape_reward(0.7, v, v, -1e-3, S).is_err());
    }

    proptest! {
        #[test]
        fn shaping_monotone_and_bounded(base in 0.0..2.0f64, d1 in 0.0..0.5f64, d2 in 0.0..0.5f64,
                                        e1 in 0.0..3.0f64, e2 in 0.0..3.0f64) {
            let (dl, dh) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let (el, eh) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let z = Vec2::zeros();
            let f = |d: f64, e: f64| shape_reward(base, Vec2::new(e, 0.0), z, d, S).unwrap();
            prop_assert!(f(dh, el) <= f(dl, el));
            prop_assert!(f(dl, eh) <= f(dl, el));
            let r = f(dh, eh);
            prop_assert!(r >= 0.0 && r <= base + 1.0);
            prop_assert_eq!(f(0.0, 0.0), base + 1.0);
        }

        #[test]
        fn base_terms_in_unit_interval(bx in -3.0..3.0f64, by in -3.0..3.0f64, yaw in -4.0..4.0f64) {
            let b = Vec2::new(bx, by);
            let o = Vec2::new(0.1, -0.2);
            for r in [task_reward(b, o, 0.25), proximity_reward(o, b, 1.0)] {
                prop_assert!((0.0..=1.0).contains(&r));
            }
            if (b - o).norm() > 0.0 {
                let f = facing_reward(yaw, o, b).unwrap();
                prop_assert!((0.0..=1.0 + 1e-15).contains(&f));
            }
        }
    }
}
