//! Scripted stand-ins for the learned policy.

use serde::{Deserialize, Serialize};

use super::body::clamp_norm;
use crate::ball_dynamics::BallState;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[serde(alias = "feedback")]
    FeedbackGuided,
    #[serde(alias = "naive")]
    NaivePursuit,
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::FeedbackGuided => "feedback",
            Self::NaivePursuit => "naive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerParams {
    /// Pursuit gain on the ball offset, 1/s.
    pub k_pursuit: f64,
    /// Time constant separating transient from steady reference, seconds.
    pub guide_tau: f64,
    /// Weight on the transient part of the reference.
    pub guide_gain: f64,
    /// Distance behind the ball, along the command, that guided pursuit aims for, metres.
    pub push_offset: f64,
    /// Guided pursuit gain on the push point offset, 1/s.
    pub guide_pursuit: f64,
    /// Guided gain on the ball velocity error.
    pub task_gain: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self { k_pursuit: 1.0, guide_tau: 1.5, guide_gain: 2.0, push_offset: 0.25, guide_pursuit: 3.0, task_gain: 1.5 }
    }
}

pub fn naive_pursuit_target(robot_position: Vec2, ball_position: Vec2, cmd: Vec2, k_pursuit: f64, max_speed: f64) -> Vec2 {
    clamp_norm(cmd + k_pursuit * (ball_position - robot_position), max_speed)
}

/// Ball-velocity feedforward with a gain on the ball velocity error, pursuit
/// of a point behind the ball, and the transient part of the reference
/// velocity.
///
/// In steady dribbling the reference settles and only the first two terms
/// remain. When the command changes, the reference jumps and that jump passes
/// through to the body before a low-pass baseline absorbs it.
#[derive(Debug, Clone, Default)]
pub struct GuidedController {
    baseline: Option<Vec2>,
}

impl GuidedController {
    #[allow(clippy::too_many_arguments)]
    pub fn target(
        &mut self,
        v_ref: Vec2,
        robot_position: Vec2,
        ball: &BallState,
        cmd: Vec2,
        params: &ControllerParams,
        max_speed: f64,
        dt: f64,
    ) -> Vec2 {
        let base = self.baseline.get_or_insert(v_ref);
        let transient = v_ref - *base;
        *base += transient * (dt / params.guide_tau).min(1.0);
        // with no command, hold off the ball on the robot's side of it
        let along = cmd.try_normalize(1e-9).or_else(|| (ball.position - robot_position).try_normalize(1e-9));
        let behind = along.unwrap_or_else(Vec2::zeros) * params.push_offset;
        let pursuit =
            ball.velocity + params.task_gain * (cmd - ball.velocity) + params.guide_pursuit * (ball.position - behind - robot_position);
        clamp_norm(pursuit + params.guide_gain * transient, max_speed)
    }
}
