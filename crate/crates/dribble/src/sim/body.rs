//! First-order body response and foot kinematics standing in for the
//! joint-level policy.
//!
//! Feet sit on their Raibert targets except when a foot pair is closing on
//! the ball. The pair then narrows into a gate behind the ball and pushes it.
//! With selective footwork only feet whose kick would move the ball velocity
//! towards the command close in; the others step wide so the ball passes
//! under the body.

use nalgebra::Rotation2;
use serde::{Deserialize, Serialize};

use super::contact::ContactParams;
use crate::ball_dynamics::BallState;
use crate::gait::{normalize_angle, raibert_target, FootIndex, GaitParams, RobotState};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BodyParams {
    /// Velocity tracking time constant, seconds.
    pub tau: f64,
    pub max_speed: f64,
    /// Yaw rate limit, rad/s.
    pub yaw_rate: f64,
    /// Yaw holds while the ball is closer than this, metres.
    pub yaw_deadband: f64,
    /// Height of the body frame above the ground, metres.
    pub body_height: f64,
    /// Lateral foot offset of a closed gate, metres.
    pub gate_closed: f64,
    /// Lateral foot offset of an open gate, metres.
    pub gate_open: f64,
    /// Sideways foot speed limit, m/s.
    pub reach_rate: f64,
    /// A foot pair reacts to the ball within this fore-aft distance, metres.
    pub reach_window: f64,
    /// A kick still counts as helpful if it leaves the ball velocity error
    /// this much larger, m/s.
    pub kick_tolerance: f64,
}

impl Default for BodyParams {
    fn default() -> Self {
        Self {
            tau: 0.2,
            max_speed: 2.5,
            yaw_rate: 3.0,
            yaw_deadband: 0.0,
            body_height: 0.3,
            gate_closed: 0.05,
            gate_open: 0.16,
            reach_rate: 1.5,
            reach_window: 0.3,
            kick_tolerance: 0.0,
        }
    }
}

pub fn clamp_norm(v: Vec2, max: f64) -> Vec2 {
    let n = v.norm();
    if n > max {
        v * (max / n)
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Footwork {
    /// Push whenever closing on the ball.
    Push,
    /// Push only when it helps, otherwise let the ball through.
    Selective,
}

/// What the feet see of the ball and how they treat it.
#[derive(Debug, Clone, Copy)]
pub struct FootPlay<'a> {
    pub ball: &'a BallState,
    pub cmd: Vec2,
    pub contact: &'a ContactParams,
    pub footwork: Footwork,
}

/// Desired sideways offsets for the four feet and a forward limit for each,
/// body frame. A closed gate pushing the ball from behind keeps its feet
/// behind the ball instead of stepping past it.
fn desired_reach(robot: &RobotState, gait: &GaitParams, params: &BodyParams, play: &FootPlay) -> ([f64; 4], [f64; 4]) {
    let FootPlay { ball, cmd, contact, footwork } = *play;
    let to_body = Rotation2::new(-robot.yaw());
    let ball_b = to_body * (ball.position - robot.body_position);
    let ball_v = to_body * ball.velocity;
    let cmd_b = to_body * cmd;
    let closing = to_body * robot.body_velocity - ball_v;
    let error = (cmd_b - ball_v).norm();
    let depth = (contact.radius.powi(2) - params.gate_closed.powi(2)).max(0.0).sqrt() * 0.8;
    let mut out = [0.0; 4];
    let mut cap = [f64::INFINITY; 4];
    // front pair then rear pair
    for pair in [[0usize, 1], [2, 3]] {
        let nominal: [Vec2; 2] =
            pair.map(|i| to_body * (raibert_target(robot, gait, robot.body_velocity, FootIndex::ALL[i]) - robot.body_position));
        let mid = (nominal[0] + nominal[1]) / 2.0;
        // the stance lead moves targets ahead of the hips, so engagement is judged from the hip line
        let hip_mid = (gait.hip(FootIndex::ALL[pair[0]]) + gait.hip(FootIndex::ALL[pair[1]])) / 2.0;
        let rel = ball_b - hip_mid;
        if rel.x.abs() >= params.reach_window || rel.dot(&closing) <= 0.0 {
            continue;
        }
        for (k, &i) in pair.iter().enumerate() {
            let side = (nominal[k].y - mid.y).signum();
            let limit = if rel.x > 0.0 { ball_b.x - depth } else { f64::INFINITY };
            let closed = Vec2::new(nominal[k].x.min(limit), mid.y + side * params.gate_closed);
            // kick this foot would deliver from the closed position
            let n = (ball_b - closed).try_normalize(1e-9).unwrap_or_else(Vec2::zeros);
            let kicked = ball_v + n * (contact.k_transfer * closing.dot(&n).max(0.0));
            let helpful = (cmd_b - kicked).norm() <= error + params.kick_tolerance;
            if helpful || footwork == Footwork::Push {
                out[i] = closed.y - nominal[k].y;
                cap[i] = limit;
            } else {
                out[i] = mid.y + side * params.gate_open - nominal[k].y;
            }
        }
    }
    (out, cap)
}

/// Advances the body one control step and places the feet.
pub fn body_step(robot: &RobotState, gait: &GaitParams, params: &BodyParams, v_target: Vec2, play: &FootPlay, dt: f64) -> RobotState {
    let ball = play.ball;
    let mut next = robot.clone();
    let target = clamp_norm(v_target, params.max_speed);
    next.body_velocity = robot.body_velocity + (target - robot.body_velocity) * (dt / params.tau);
    next.body_position = robot.body_position + next.body_velocity * dt;

    let to_ball = ball.position - next.body_position;
    if to_ball.norm() > params.yaw_deadband.max(1e-9) {
        let bearing = to_ball.y.atan2(to_ball.x);
        let err = normalize_angle(bearing - robot.yaw());
        let max_turn = params.yaw_rate * dt;
        next.set_yaw(robot.yaw() + err.clamp(-max_turn, max_turn));
    }

    let (want, cap) = desired_reach(&next, gait, params, play);
    let to_body = Rotation2::new(-next.yaw());
    let forward = Rotation2::new(next.yaw()) * Vec2::new(1.0, 0.0);
    let max_step = params.reach_rate * dt;
    let side = Rotation2::new(next.yaw()) * Vec2::new(0.0, 1.0);
    for foot in FootIndex::ALL {
        let i = foot.get();
        next.foot_reach[i] = robot.foot_reach[i] + (want[i] - robot.foot_reach[i]).clamp(-max_step, max_step);
        let mut p = raibert_target(&next, gait, next.body_velocity, foot) + side * next.foot_reach[i];
        let ahead = (to_body * (p - next.body_position)).x - cap[i];
        if ahead > 0.0 {
            p -= forward * ahead;
        }
        next.foot_positions[i] = p;
    }
    next.clock.advance(dt);
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn robot() -> RobotState {
        RobotState::standing(Vec2::zeros(), 0.0, &GaitParams::default()).unwrap()
    }

    const CONTACT: ContactParams = ContactParams { radius: 0.11, k_transfer: 0.8 };

    fn play(ball: &BallState, cmd: Vec2) -> FootPlay<'_> {
        FootPlay { ball, cmd, contact: &CONTACT, footwork: Footwork::Selective }
    }

    fn far_ball() -> BallState {
        BallState::at_rest(Vec2::new(3.0, 0.0))
    }

    fn step(r: &RobotState, v: Vec2) -> RobotState {
        body_step(r, &GaitParams::default(), &BodyParams::default(), v, &play(&far_ball(), Vec2::zeros()), 0.02)
    }

    #[test]
    fn first_order_lag() {
        let out = step(&robot(), Vec2::new(1.0, 0.0));
        assert!((out.body_velocity - Vec2::new(0.1, 0.0)).norm() < 1e-12);
        assert!((out.body_position - Vec2::new(0.002, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn equilibrium_and_clamp() {
        let mut r = robot();
        r.body_velocity = Vec2::new(0.4, -0.3);
        assert_eq!(step(&r, r.body_velocity).body_velocity, r.body_velocity);
        let fast = step(&robot(), Vec2::new(10.0, 0.0));
        let capped = step(&robot(), Vec2::new(2.5, 0.0));
        assert_eq!(fast.body_velocity, capped.body_velocity);
    }

    #[test]
    fn yaw_rate_limited() {
        let (g, p) = (GaitParams::default(), BodyParams::default());
        let ball = BallState::at_rest(Vec2::new(0.0, 1.0));
        let out = body_step(&robot(), &g, &p, Vec2::zeros(), &play(&ball, Vec2::zeros()), 0.02);
        assert!((out.yaw() - 0.06).abs() < 1e-12);
        let near = BodyParams { yaw_deadband: 2.0, ..p };
        let out = body_step(&robot(), &g, &near, Vec2::zeros(), &play(&ball, Vec2::zeros()), 0.02);
        assert_eq!(out.yaw(), 0.0);
    }

    #[test]
    fn feet_on_targets_away_from_ball() {
        let g = GaitParams::default();
        let out = step(&robot(), Vec2::new(1.0, 0.0));
        for foot in FootIndex::ALL {
            assert_eq!(out.foot_positions[foot.get()], raibert_target(&out, &g, out.body_velocity, foot));
        }
    }

    #[test]
    fn gate_closes_on_ball_it_can_push() {
        let (g, p) = (GaitParams::default(), BodyParams::default());
        let ball = BallState::at_rest(Vec2::new(0.35, 0.0));
        let mut r = robot();
        for _ in 0..3 {
            r = body_step(&r, &g, &p, Vec2::new(0.5, 0.0), &play(&ball, Vec2::new(1.0, 0.0)), 0.02);
        }
        // 0.07 inward at 0.03 per step
        assert!((r.foot_reach[0] + 0.07).abs() < 1e-12);
        assert!((r.foot_reach[1] - 0.07).abs() < 1e-12);
        assert_eq!(r.foot_reach[2], 0.0);
    }

    #[test]
    fn gate_opens_when_outrunning_a_ball_that_should_slow() {
        let (g, p) = (GaitParams::default(), BodyParams::default());
        let ball = BallState::new(Vec2::new(0.5, 0.0), Vec2::new(0.8, 0.0));
        let mut r = robot();
        r.body_velocity = Vec2::new(1.5, 0.0);
        for _ in 0..2 {
            r = body_step(&r, &g, &p, Vec2::new(1.5, 0.0), &play(&ball, Vec2::zeros()), 0.02);
        }
        assert!((r.foot_reach[0] - 0.04).abs() < 1e-12);
        assert!((r.foot_reach[1] + 0.04).abs() < 1e-12);
    }

    #[test]
    fn push_footwork_closes_regardless() {
        let (g, p) = (GaitParams::default(), BodyParams::default());
        let ball = BallState::new(Vec2::new(0.5, 0.0), Vec2::new(0.8, 0.0));
        let mut r = robot();
        r.body_velocity = Vec2::new(1.5, 0.0);
        let push = FootPlay { footwork: Footwork::Push, ..play(&ball, Vec2::zeros()) };
        for _ in 0..2 {
            r = body_step(&r, &g, &p, Vec2::new(1.5, 0.0), &push, 0.02);
        }
        assert!((r.foot_reach[0] + 0.06).abs() < 1e-12);
        assert!((r.foot_reach[1] - 0.06).abs() < 1e-12);
    }
}
