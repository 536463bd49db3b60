//! Closed-loop episode: perceive, control, move the body, resolve contact,
//! roll the ball, record.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::body::{body_step, FootPlay, Footwork};
use super::commands::CommandScript;
use super::config::{PerceptionMode, ScenarioConfig};
use super::contact::contact_step;
use super::controller::{naive_pursuit_target, ControllerKind, GuidedController};
use super::randomization::{rng_for, sample_randomization, BallEvent, Stream};
use super::record::{metrics, Metrics, TrajectoryRecord, TrajectoryRow};
use crate::ball_dynamics::{self, BallState, TerrainParams};
use crate::error::{Error, Result};
use crate::feedback::FeedbackState;
use crate::filter::{self, FilterState, MeasurementSet, NoiseConfig, Slot};
use crate::gait::{feet_deviation, RobotState};
use crate::perception::{projection_intersection, synthetic_bbox, viewing_angle_position, BoundingBox, CameraModel, Vec3};
use crate::Vec2;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: TrajectoryRecord,
    pub metrics: Metrics,
    /// Terrain actually simulated, after randomization.
    pub terrain: TerrainParams,
}

/// A resolved episode: randomization applied, scripts built, cameras checked.
#[derive(Debug, Clone)]
pub(super) struct Episode {
    terrain: TerrainParams,
    script: CommandScript,
    events: Vec<(usize, BallEvent, bool)>,
    pub(super) arrival_rate: f64,
    cameras: [CameraModel; 2],
    pub(super) noise: NoiseConfig,
    steps: usize,
}

impl Episode {
    pub(super) fn resolve(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let steps = (cfg.duration / cfg.dt + 1e-9).floor() as usize;
        let mut terrain = cfg.terrain;
        let mut arrival_rate = cfg.sensors.arrival_rate;
        let mut events = Vec::new();
        let r = &cfg.randomization;
        if r.enabled {
            let s = sample_randomization(&r.ranges, cfg.seed)?;
            if r.terrain {
                terrain = s.terrain;
            }
            if r.arrival_rate {
                arrival_rate = s.arrival_rate;
            }
            let at = |e: &BallEvent| ((e.at_fraction * steps as f64).round() as usize).max(1);
            if r.teleport {
                events.push((at(&s.teleport), s.teleport, true));
            }
            if r.perturbation {
                events.push((at(&s.perturbation), s.perturbation, false));
            }
        }
        Ok(Self {
            terrain,
            script: cfg.script.build(cfg.duration, cfg.dt, cfg.seed)?,
            events,
            arrival_rate,
            cameras: [cfg.cameras[0].build()?, cfg.cameras[1].build()?],
            noise: NoiseConfig::try_from(cfg.noise)?,
            steps,
        })
    }
}

/// Synthetic camera pipeline feeding the filter.
pub(super) struct Perception<'a> {
    cfg: &'a ScenarioConfig,
    ep: &'a Episode,
    rng: ChaCha8Rng,
    filter: Option<FilterState>,
}

impl<'a> Perception<'a> {
    pub(super) fn new(cfg: &'a ScenarioConfig, ep: &'a Episode) -> Self {
        Self { cfg, ep, rng: rng_for(cfg.seed, Stream::Sensors), filter: None }
    }

    fn detect(&mut self, cam: &CameraModel, ball_body: Vec3) -> Result<Option<BoundingBox>> {
        if self.rng.gen::<f64>() >= self.ep.arrival_rate {
            return Ok(None);
        }
        let Some(b) = synthetic_bbox(ball_body, cam, self.cfg.sensors.ball_diameter, 1.0)? else {
            return Ok(None);
        };
        let n = Normal::new(0.0, self.cfg.sensors.pixel_noise.max(0.0)).expect("valid sigma");
        let mut jitter = || n.sample(&mut self.rng);
        let noisy = BoundingBox::new(b.x_min + jitter(), b.y_min + jitter(), b.x_max + jitter(), b.y_max + jitter(), 1.0);
        let Ok(mut noisy) = noisy else { return Ok(None) };
        // confidence falls off with distance from the optical axis
        let off = (noisy.center() - cam.principal_point).norm() / cam.focal;
        noisy.confidence = (1.0 - off / (cam.fov / 2.0)).clamp(0.0, 1.0);
        Ok(Some(noisy))
    }

    /// Raw measurements for this step and the filter's position and velocity
    /// estimate, `None` until a first detection starts the filter.
    pub(super) fn observe(&mut self, ball: &BallState, robot: &RobotState) -> Result<(MeasurementSet, Option<(Vec2, Vec2)>)> {
        let yaw = robot.yaw();
        let (s, c) = yaw.sin_cos();
        let to_world = |p: Vec2| robot.body_position + Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y);
        let rel = ball.position - robot.body_position;
        let body_xy = Vec2::new(c * rel.x + s * rel.y, -s * rel.x + c * rel.y);
        let radius = self.cfg.sensors.ball_diameter / 2.0;
        let ball_body = Vec3::new(body_xy.x, body_xy.y, radius - self.cfg.body.body_height);

        let cams = self.ep.cameras.clone();
        let boxes = [self.detect(&cams[0], ball_body)?, self.detect(&cams[1], ball_body)?];

        let mut meas = MeasurementSet::empty();
        let slots = [(Slot::AngleCam1, Slot::CenterCam1), (Slot::AngleCam2, Slot::CenterCam2)];
        for ((b, cam), (angle_slot, center_slot)) in boxes.iter().zip(&cams).zip(slots) {
            let Some(b) = b else { continue };
            if let Ok(p) = viewing_angle_position(b, cam, self.cfg.sensors.ball_diameter) {
                meas.set(angle_slot, Some(to_world(Vec2::new(p.x, p.y))));
            }
            if let Ok(p) = projection_intersection(b.center(), cam, self.cfg.body.body_height, radius) {
                meas.set(center_slot, Some(to_world(p)));
            }
        }
        let nv = Normal::new(0.0, self.cfg.sensors.velocity_noise.max(0.0)).expect("valid sigma");
        meas.set(Slot::Velocity, Some(ball.velocity + Vec2::new(nv.sample(&mut self.rng), nv.sample(&mut self.rng))));

        self.filter = match self.filter {
            Some(state) => Some(filter::step(&state, self.cfg.dt, &meas, &self.ep.noise)?),
            None if boxes.iter().any(Option::is_some) => {
                let d = self.cfg.sensors.ball_diameter;
                Some(filter::init([boxes[0].as_ref(), boxes[1].as_ref()], [&cams[0], &cams[1]], d, to_world)?)
            }
            None => None,
        };
        Ok((meas, self.filter.map(|f| (f.position(), f.velocity()))))
    }

    pub(super) fn filter(&self) -> Option<&FilterState> {
        self.filter.as_ref()
    }
}

/// Terrain an episode with this config simulates, after randomization.
pub fn resolved_terrain(cfg: &ScenarioConfig) -> Result<TerrainParams> {
    Ok(Episode::resolve(cfg)?.terrain)
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let ep = Episode::resolve(cfg)?;
    let dt = cfg.dt;
    let c_d = ep.terrain.drag_coefficient;
    let gait = &cfg.gait;

    let mut robot = RobotState::standing(Vec2::zeros(), 0.0, gait)?;
    let mut ball = BallState::new(Vec2::from(cfg.initial.ball_position), Vec2::from(cfg.initial.ball_velocity));
    let mut fb = FeedbackState::new(cfg.feedback);
    let mut perception = match cfg.perception {
        PerceptionMode::GroundTruth => None,
        PerceptionMode::SyntheticCameras => Some(Perception::new(cfg, &ep)),
    };

    let mut record = TrajectoryRecord::default();
    let mut guided = GuidedController::default();
    for k in 0..=ep.steps {
        let t = k as f64 * dt;
        for (at, event, teleport) in &ep.events {
            if *at == k {
                if *teleport {
                    ball.position += event.offset;
                } else {
                    ball.velocity += event.offset;
                }
            }
        }
        let cmd = ep.script.at(t);

        let estimate = match perception.as_mut() {
            None => Some((ball.position, ball.velocity)),
            Some(p) => p.observe(&ball, &robot)?.1,
        };
        let (est_p, est_v) = estimate.unwrap_or((robot.body_position, Vec2::zeros()));

        if estimate.is_some() {
            fb = fb.accumulate(est_v, robot.body_velocity, dt)?;
        }
        let v_ref = fb.compute_reference(est_v, robot.body_velocity, cmd);
        let v_target = match (estimate, cfg.controller) {
            (None, _) => Vec2::zeros(),
            (Some(_), ControllerKind::FeedbackGuided) => {
                guided.target(v_ref, robot.body_position, &BallState::new(est_p, est_v), cmd, &cfg.control, cfg.body.max_speed, dt)
            }
            (Some(_), ControllerKind::NaivePursuit) => {
                naive_pursuit_target(robot.body_position, est_p, cmd, cfg.control.k_pursuit, cfg.body.max_speed)
            }
        };

        let dp_feet = feet_deviation(&robot, gait, v_ref, ball.position);
        let rewards = cfg.reward.evaluate(
            ball.position,
            ball.velocity,
            cmd,
            robot.body_position,
            robot.yaw(),
            robot.body_velocity,
            v_ref,
            dp_feet,
        )?;
        record.rows.push(TrajectoryRow {
            t,
            ball_px: ball.position.x,
            ball_py: ball.position.y,
            ball_vx: ball.velocity.x,
            ball_vy: ball.velocity.y,
            robot_px: robot.body_position.x,
            robot_py: robot.body_position.y,
            robot_yaw: robot.yaw(),
            cmd_x: cmd.x,
            cmd_y: cmd.y,
            vref_x: v_ref.x,
            vref_y: v_ref.y,
            est_px: est_p.x,
            est_py: est_p.y,
            est_vx: est_v.x,
            est_vy: est_v.y,
            reward_base: rewards.base_total,
            reward_shaped: rewards.shaped_total,
        });
        record.robot_velocity.push([robot.body_velocity.x, robot.body_velocity.y]);
        if k == ep.steps {
            break;
        }

        // letting the ball through is part of the overtaking strategy
        let footwork = match cfg.controller {
            ControllerKind::FeedbackGuided => Footwork::Selective,
            ControllerKind::NaivePursuit => Footwork::Push,
        };
        let play = FootPlay { ball: &ball, cmd, contact: &cfg.contact, footwork };
        let next = body_step(&robot, gait, &cfg.body, v_target, &play, dt);
        // feet in contact translate with the body; placement changes happen in swing
        let foot_velocities = [next.body_velocity; 4];
        robot = next;
        ball = contact_step(&robot.foot_positions, &foot_velocities, &ball, &cfg.contact);
        ball = ball_dynamics::step(&ball, c_d, dt)?;

        let robot_ok = robot.body_position.iter().chain(robot.body_velocity.iter()).all(|v| v.is_finite());
        if !ball.is_finite() || !robot_ok || !robot.yaw().is_finite() {
            return Err(Error::SimulationDiverged { step: k + 1 });
        }
    }

    let metrics = metrics(&record, ep.script.stop_time(), dt, cfg.seed)?;
    Ok(RunOutput { record, metrics, terrain: ep.terrain })
}
