//! Raibert foot placement and the foot deviation penalty.

use std::f64::consts::PI;

use nalgebra::Rotation2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec2;

/// A foot counts as touching the ball below this distance, metres.
pub const NEAR_THRESHOLD: f64 = 0.10;

/// Index into the four feet: front-left, front-right, rear-left, rear-right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FootIndex(usize);

impl FootIndex {
    pub const ALL: [FootIndex; 4] = [FootIndex(0), FootIndex(1), FootIndex(2), FootIndex(3)];

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for FootIndex {
    type Error = Error;

    fn try_from(i: usize) -> Result<Self> {
        if i < 4 {
            Ok(Self(i))
        } else {
            Err(Error::InvalidInput(format!("foot index {i} out of range 0..3")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaitParams {
    /// Nominal hip offsets in the body frame, FL, FR, RL, RR.
    pub hips: [[f64; 2]; 4],
    pub period: f64,
    pub duty_factor: f64,
}

impl GaitParams {
    pub fn with_hip_offsets(x: f64, y: f64) -> Self {
        Self { hips: [[x, y], [x, -y], [-x, y], [-x, -y]], ..Self::default() }
    }

    pub fn stance_duration(&self) -> f64 {
        self.period * self.duty_factor
    }

    pub fn hip(&self, foot: FootIndex) -> Vec2 {
        let [x, y] = self.hips[foot.get()];
        Vec2::new(x, y)
    }
}

impl Default for GaitParams {
    fn default() -> Self {
        Self { hips: [[0.19, 0.12], [0.19, -0.12], [-0.19, 0.12], [-0.19, -0.12]], period: 0.5, duty_factor: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitClock {
    phase: f64,
    pub period: f64,
    pub duty_factor: f64,
}

impl GaitClock {
    pub fn new(period: f64, duty_factor: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidInput(format!("gait period must be positive, got {period}")));
        }
        if !(duty_factor > 0.0 && duty_factor < 1.0) {
            return Err(Error::InvalidInput(format!("duty factor must lie in (0,1), got {duty_factor}")));
        }
        Ok(Self { phase: 0.0, period, duty_factor })
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn advance(&mut self, dt: f64) {
        self.phase = (self.phase + dt / self.period).rem_euclid(1.0);
        // rem_euclid can round up to exactly 1.0 for tiny negative inputs
        if self.phase >= 1.0 {
            self.phase = 0.0;
        }
    }
}

/// Wraps an angle into (−π, π].
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub body_position: Vec2,
    body_yaw: f64,
    pub body_velocity: Vec2,
    pub foot_positions: [Vec2; 4],
    /// Sideways foot offsets from the Raibert targets, body frame, metres.
    pub foot_reach: [f64; 4],
    pub clock: GaitClock,
}

impl RobotState {
    /// Standing still with every foot on its hip projection.
    pub fn standing(position: Vec2, yaw: f64, gait: &GaitParams) -> Result<Self> {
        let clock = GaitClock::new(gait.period, gait.duty_factor)?;
        let mut robot = Self {
            body_position: position,
            body_yaw: normalize_angle(yaw),
            body_velocity: Vec2::zeros(),
            foot_positions: [position; 4],
            foot_reach: [0.0; 4],
            clock,
        };
        for foot in FootIndex::ALL {
            robot.foot_positions[foot.get()] = raibert_target(&robot, gait, Vec2::zeros(), foot);
        }
        Ok(robot)
    }

    pub fn yaw(&self) -> f64 {
        self.body_yaw
    }

    pub fn set_yaw(&mut self, yaw: f64) {
        self.body_yaw = normalize_angle(yaw);
    }

    pub fn heading(&self) -> Vec2 {
        Vec2::new(self.body_yaw.cos(), self.body_yaw.sin())
    }
}

/// Hip projection rotated by yaw about the body, shifted by `v_ref·T_stance/2`.
pub fn raibert_target(robot: &RobotState, gait: &GaitParams, v_ref: Vec2, foot: FootIndex) -> Vec2 {
    let rot = Rotation2::new(robot.body_yaw);
    robot.body_position + rot * gait.hip(foot) + v_ref * (gait.stance_duration() / 2.0)
}

pub fn near_indicator(ball_position: Vec2, foot_position: Vec2) -> bool {
    (ball_position - foot_position).norm() < NEAR_THRESHOLD
}

pub fn feet_deviation(robot: &RobotState, gait: &GaitParams, v_ref: Vec2, ball_position: Vec2) -> f64 {
    FootIndex::ALL
        .iter()
        .map(|&foot| {
            let p = robot.foot_positions[foot.get()];
            if near_indicator(ball_position, p) {
                0.0
            } else {
                (p - raibert_target(robot, gait, v_ref, foot)).norm()
            }
        })
        .sum()
}
