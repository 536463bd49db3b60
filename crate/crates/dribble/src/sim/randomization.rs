//! Domain randomization over the planar subset of the training ranges.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ball_dynamics::TerrainParams;
use crate::error::{Error, Result};
use crate::Vec2;

/// Independent RNG streams carved out of one seed.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Randomization = 1,
    Sensors = 2,
    Commands = 3,
}

pub fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn sample(&self, name: &str, rng: &mut impl Rng) -> Result<f64> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.hi < self.lo {
            return Err(Error::InvalidInput(format!("empty range for {name}: [{}, {}]", self.lo, self.hi)));
        }
        if self.lo == self.hi {
            // still draw so later samples do not shift
            let _: f64 = rng.gen();
            return Ok(self.lo);
        }
        Ok(self.lo + (self.hi - self.lo) * rng.gen::<f64>())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomizationRanges {
    pub drag_coefficient: Range,
    pub ball_mass: Range,
    pub teleport_distance: Range,
    pub perturbation_speed: Range,
    pub arrival_rate: Range,
    pub command: Range,
}

impl Default for RandomizationRanges {
    fn default() -> Self {
        Self {
            drag_coefficient: Range::new(-0.1, 0.5),
            ball_mass: Range::new(0.2, 0.4),
            teleport_distance: Range::new(0.0, 1.0),
            perturbation_speed: Range::new(0.0, 0.3),
            arrival_rate: Range::new(0.3, 0.7),
            command: Range::new(-1.5, 1.5),
        }
    }
}

/// One-shot ball disturbance: a displacement and a velocity kick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallEvent {
    /// Fraction of the episode at which the event fires.
    pub at_fraction: f64,
    pub offset: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizationSample {
    pub terrain: TerrainParams,
    pub teleport: BallEvent,
    pub perturbation: BallEvent,
    pub arrival_rate: f64,
    pub command: Vec2,
}

fn event(magnitude: f64, rng: &mut impl Rng) -> BallEvent {
    let angle = TAU * rng.gen::<f64>();
    let at_fraction = 0.25 + 0.5 * rng.gen::<f64>();
    BallEvent { at_fraction, offset: magnitude * Vec2::new(angle.cos(), angle.sin()) }
}

pub fn sample_randomization(ranges: &RandomizationRanges, seed: u64) -> Result<RandomizationSample> {
    let mut rng = rng_for(seed, Stream::Randomization);
    let r = &mut rng;
    let drag = ranges.drag_coefficient.sample("drag_coefficient", r)?;
    let mass = ranges.ball_mass.sample("ball_mass", r)?;
    let teleport = ranges.teleport_distance.sample("teleport_distance", r)?;
    let perturbation = ranges.perturbation_speed.sample("perturbation_speed", r)?;
    let arrival_rate = ranges.arrival_rate.sample("arrival_rate", r)?;
    let command = Vec2::new(ranges.command.sample("command", r)?, ranges.command.sample("command", r)?);
    Ok(RandomizationSample {
        terrain: TerrainParams::new(drag, mass)?,
        teleport: event(teleport, r),
        perturbation: event(perturbation, r),
        arrival_rate,
        command,
    })
}
