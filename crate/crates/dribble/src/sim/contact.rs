//! Velocity-level foot–ball impulses.

use serde::{Deserialize, Serialize};

use crate::ball_dynamics::BallState;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactParams {
    /// Ball radius plus foot pad, metres.
    pub radius: f64,
    pub k_transfer: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self { radius: 0.11, k_transfer: 0.8 }
    }
}

/// Applies at most one impulse from the nearest approaching foot in range.
/// Equal distances go to the lower foot index.
pub fn contact_step(feet: &[Vec2; 4], foot_velocities: &[Vec2; 4], ball: &BallState, params: &ContactParams) -> BallState {
    let mut best: Option<(f64, Vec2, Vec2)> = None;
    for (p, v) in feet.iter().zip(foot_velocities) {
        let r = ball.position - p;
        let d = r.norm();
        if d >= params.radius || d == 0.0 {
            continue;
        }
        let n = r / d;
        let closing = (v - ball.velocity).dot(&n);
        if closing <= 0.0 {
            continue;
        }
        if best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, n, *v));
        }
    }
    match best {
        None => *ball,
        Some((_, n, v)) => {
            let dv = params.k_transfer * (v - ball.velocity).dot(&n) * n;
            BallState::new(ball.position, ball.velocity + dv)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FAR: Vec2 = Vec2::new(10.0, 10.0);

    fn feet(first: Vec2) -> [Vec2; 4] {
        [first, FAR, FAR, FAR]
    }

    #[test]
    fn no_contact_out_of_range() {
        let b = BallState::new(Vec2::zeros(), Vec2::new(1.0, 0.0));
        let out = contact_step(&[FAR; 4], &[Vec2::zeros(); 4], &b, &ContactParams::default());
        assert_eq!(out, b);
    }

    #[test]
    fn resting_foot_blocks_head_on() {
        let b = BallState::new(Vec2::zeros(), Vec2::new(1.0, 0.0));
        let out = contact_step(&feet(Vec2::new(0.1, 0.0)), &[Vec2::zeros(); 4], &b, &ContactParams::default());
        assert!((out.velocity - Vec2::new(0.2, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn receding_foot_ignored() {
        let b = BallState::at_rest(Vec2::zeros());
        let v = [Vec2::new(1.0, 0.0), Vec2::zeros(), Vec2::zeros(), Vec2::zeros()];
        let out = contact_step(&feet(Vec2::new(0.1, 0.0)), &v, &b, &ContactParams::default());
        assert_eq!(out, b);
    }

    #[test]
    fn nearest_then_lowest_index() {
        let b = BallState::at_rest(Vec2::zeros());
        let p = [Vec2::new(-0.1, 0.0), Vec2::new(0.0, -0.1), Vec2::new(-0.05, 0.0), FAR];
        let v = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(2.0, 0.0), Vec2::zeros()];
        let out = contact_step(&p, &v, &b, &ContactParams::default());
        assert!((out.velocity - Vec2::new(1.6, 0.0)).norm() < 1e-12);

        let p = [Vec2::new(-0.1, 0.0), Vec2::new(0.0, -0.1), FAR, FAR];
        let out = contact_step(&p, &v, &b, &ContactParams::default());
        assert!((out.velocity - Vec2::new(0.8, 0.0)).norm() < 1e-12);
    }
}
