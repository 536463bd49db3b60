//! Piecewise-constant velocity command scripts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommandEntry {
    pub t: f64,
    pub cmd: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommandScript {
    entries: Vec<CommandEntry>,
}

impl CommandScript {
    pub fn new(entries: Vec<CommandEntry>) -> Result<Self> {
        for e in &entries {
            if !(e.t.is_finite() && e.cmd.iter().all(|v| v.is_finite())) {
                return Err(Error::Config { key: "commands".into(), message: "entries must be finite".into() });
            }
        }
        if entries.windows(2).any(|w| w[1].t < w[0].t) {
            return Err(Error::Config { key: "commands".into(), message: "start times must be non-decreasing".into() });
        }
        Ok(Self { entries })
    }

    pub fn from_pairs(pairs: &[(f64, Vec2)]) -> Result<Self> {
        Self::new(pairs.iter().map(|(t, c)| CommandEntry { t: *t, cmd: [c.x, c.y] }).collect())
    }

    pub fn entries(&self) -> &[CommandEntry] {
        &self.entries
    }

    /// Command active at `t`: the last entry starting at or before it, zero before the first.
    pub fn at(&self, t: f64) -> Vec2 {
        let idx = self.entries.partition_point(|e| e.t <= t + 1e-9);
        match idx {
            0 => Vec2::zeros(),
            i => Vec2::from(self.entries[i - 1].cmd),
        }
    }

    /// Start of the first zero command that follows a non-zero one.
    pub fn stop_time(&self) -> Option<f64> {
        let mut moving = false;
        for e in &self.entries {
            let zero = e.cmd == [0.0, 0.0];
            if moving && zero {
                return Some(e.t);
            }
            moving |= !zero;
        }
        None
    }
}

/// Forward at `speed` for `hold` seconds, then zero.
pub fn dribble_and_stop(speed: f64, hold: f64) -> CommandScript {
    CommandScript::from_pairs(&[(0.0, Vec2::new(speed, 0.0)), (hold, Vec2::zeros())]).expect("finite script")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub diameter: f64,
    pub speed: f64,
}

impl Circle {
    pub fn period(&self) -> f64 {
        std::f64::consts::PI * self.diameter / self.speed
    }

    /// Centre relative to the start point; the path leaves along `+x` and turns left.
    pub fn center_offset(&self) -> Vec2 {
        Vec2::new(0.0, self.diameter / 2.0)
    }

    /// Distance from `p` to the circle that starts at `start`.
    pub fn path_distance(&self, start: Vec2, p: Vec2) -> f64 {
        ((p - start - self.center_offset()).norm() - self.diameter / 2.0).abs()
    }
}

/// Tangential commands around a circle. Each period is cut into whole
/// segments close to `dt` long, each commanding the tangent at its mid angle,
/// so the commands integrate back to the start after every period.
pub fn circle_command_script(diameter: f64, speed: f64, duration: f64, dt: f64) -> Result<CommandScript> {
    for (name, v) in [("diameter", diameter), ("speed", speed), ("duration", duration), ("dt", dt)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    let circle = Circle { diameter, speed };
    let period = circle.period();
    let per_period = (period / dt).round().max(3.0) as usize;
    let h = period / per_period as f64;
    let count = (duration / h).ceil() as usize;
    let entries = (0..count)
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * ((k % per_period) as f64 + 0.5) / per_period as f64;
            CommandEntry { t: k as f64 * h, cmd: [speed * phi.cos(), speed * phi.sin()] }
        })
        .collect();
    CommandScript::new(entries)
}
