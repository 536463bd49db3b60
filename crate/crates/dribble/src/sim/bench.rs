//! Filter accuracy on a prescribed rolling-ball trajectory seen from a
//! stationary robot.

use nalgebra::{Matrix4, SMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::config::ScenarioConfig;
use super::randomization::{rng_for, Stream};
use super::scenario::{Episode, Perception};
use crate::ball_dynamics::{self, BallState};
use crate::error::Result;
use crate::filter::{self, FilterState, MeasurementSet, Slot, P0};
use crate::gait::RobotState;
use crate::Vec2;

/// Where the raw measurements come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchSource {
    /// Truth plus Gaussian noise with the filter's own `R` blocks.
    ModelNoise,
    /// Noisy detection boxes through the fisheye models.
    Cameras,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotRmse {
    pub slot: &'static str,
    /// `None` when the slot never reported.
    pub rmse: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub source: BenchSource,
    pub seed: u64,
    pub steps: usize,
    /// Position slots only; the velocity slot is scored separately.
    pub slots: Vec<SlotRmse>,
    pub velocity_slot_rmse: Option<f64>,
    pub fused_rmse: f64,
    pub fused_velocity_rmse: f64,
    pub max_trace_p: f64,
}

impl BenchReport {
    /// Smallest per-slot raw position RMSE.
    pub fn best_slot_rmse(&self) -> Option<f64> {
        self.slots.iter().filter_map(|s| s.rmse).reduce(f64::min)
    }
}

pub const POSITION_SLOTS: [Slot; 4] = [Slot::AngleCam1, Slot::AngleCam2, Slot::CenterCam1, Slot::CenterCam2];

fn slot_name(slot: Slot) -> &'static str {
    match slot {
        Slot::AngleCam1 => "pos_angle_cam1",
        Slot::AngleCam2 => "pos_angle_cam2",
        Slot::CenterCam1 => "pos_center_cam1",
        Slot::CenterCam2 => "pos_center_cam2",
        Slot::Velocity => "vel_estimate",
    }
}

/// Ball rolling across the robot's forward view under the configured drag.
pub fn bench_trajectory(cfg: &ScenarioConfig) -> Result<Vec<BallState>> {
    let steps = (cfg.duration / cfg.dt + 1e-9).floor() as usize;
    let mut ball = BallState::new(Vec2::new(0.8, -0.5), Vec2::new(0.25, 0.2));
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        out.push(ball);
        ball = ball_dynamics::step(&ball, cfg.terrain.drag_coefficient, cfg.dt)?;
    }
    Ok(out)
}

#[derive(Default)]
struct Sums {
    sq: [f64; 5],
    n: [usize; 5],
    fused_sq: f64,
    fused_v_sq: f64,
    fused_n: usize,
    max_trace: f64,
}

impl Sums {
    fn record(&mut self, truth: &BallState, meas: &MeasurementSet, est: Option<&FilterState>) {
        for (slot, value) in meas.present() {
            let target = if slot == Slot::Velocity { truth.velocity } else { truth.position };
            self.sq[slot.index()] += (value - target).norm_squared();
            self.n[slot.index()] += 1;
        }
        if let Some(f) = est {
            self.fused_sq += (f.position() - truth.position).norm_squared();
            self.fused_v_sq += (f.velocity() - truth.velocity).norm_squared();
            self.fused_n += 1;
            self.max_trace = self.max_trace.max(f.p.trace());
        }
    }

    fn report(self, source: BenchSource, seed: u64, steps: usize) -> BenchReport {
        let rmse = |sq: f64, n: usize| (n > 0).then(|| (sq / n as f64).sqrt());
        let v = Slot::Velocity.index();
        BenchReport {
            source,
            seed,
            steps,
            slots: POSITION_SLOTS
                .iter()
                .map(|&s| SlotRmse { slot: slot_name(s), rmse: rmse(self.sq[s.index()], self.n[s.index()]), samples: self.n[s.index()] })
                .collect(),
            velocity_slot_rmse: rmse(self.sq[v], self.n[v]),
            fused_rmse: rmse(self.fused_sq, self.fused_n).unwrap_or(f64::NAN),
            fused_velocity_rmse: rmse(self.fused_v_sq, self.fused_n).unwrap_or(f64::NAN),
            max_trace_p: self.max_trace,
        }
    }
}

/// Runs the filter over [`bench_trajectory`] and scores raw slots against
/// the fused estimate. Uses the config's seed, noise, sensors and cameras.
pub fn filter_bench(cfg: &ScenarioConfig, source: BenchSource) -> Result<BenchReport> {
    let ep = Episode::resolve(cfg)?;
    let truth = bench_trajectory(cfg)?;
    let mut sums = Sums::default();
    match source {
        BenchSource::Cameras => {
            let robot = RobotState::standing(Vec2::zeros(), 0.0, &cfg.gait)?;
            let mut perception = Perception::new(cfg, &ep);
            for ball in &truth {
                let (meas, _) = perception.observe(ball, &robot)?;
                sums.record(ball, &meas, perception.filter());
            }
        }
        BenchSource::ModelNoise => {
            let noise = ep.noise;
            let mut rng = rng_for(cfg.seed, Stream::Sensors);
            let mut state: Option<FilterState> = None;
            for ball in &truth {
                let mut meas = MeasurementSet::empty();
                // both slots of a camera share its frame
                for pair in [[Slot::AngleCam1, Slot::CenterCam1], [Slot::AngleCam2, Slot::CenterCam2]] {
                    if rng.gen::<f64>() >= ep.arrival_rate {
                        continue;
                    }
                    for slot in pair {
                        meas.set(slot, Some(ball.position + noisy(&noise.r, slot, &mut rng)));
                    }
                }
                meas.set(Slot::Velocity, Some(ball.velocity + noisy(&noise.r, Slot::Velocity, &mut rng)));
                state = match state {
                    Some(s) => Some(filter::step(&s, cfg.dt, &meas, &noise)?),
                    None => POSITION_SLOTS
                        .iter()
                        .find_map(|&s| meas.get(s))
                        .map(|p| FilterState::new(p, Vec2::zeros(), Matrix4::identity() * P0)),
                };
                sums.record(ball, &meas, state.as_ref());
            }
        }
    }
    Ok(sums.report(source, cfg.seed, truth.len()))
}

fn noisy(r: &SMatrix<f64, 10, 10>, slot: Slot, rng: &mut ChaCha8Rng) -> Vec2 {
    let i = 2 * slot.index();
    let draw = |var: f64, rng: &mut ChaCha8Rng| Normal::new(0.0, var.max(0.0).sqrt()).expect("valid sigma").sample(rng);
    Vec2::new(draw(r[(i, i)], rng), draw(r[(i + 1, i + 1)], rng))
}
