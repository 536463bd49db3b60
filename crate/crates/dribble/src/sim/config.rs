//! Scenario configuration, read from TOML.

use serde::{Deserialize, Serialize};

use super::body::BodyParams;
use super::commands::{circle_command_script, dribble_and_stop, CommandEntry, CommandScript};
use super::contact::ContactParams;
use super::controller::{ControllerKind, ControllerParams};
use super::randomization::{rng_for, RandomizationRanges, Stream};
use crate::ball_dynamics::TerrainParams;
use crate::error::{Error, Result};
use crate::feedback::FeedbackGains;
use crate::filter::NoiseDiagonals;
use crate::gait::GaitParams;
use crate::perception::{CameraModel, Vec3, DEFAULT_FOV};
use crate::reward::RewardParams;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerceptionMode {
    GroundTruth,
    SyntheticCameras,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScriptSpec {
    DribbleAndStop {
        #[serde(default = "one")]
        speed: f64,
        #[serde(default = "five")]
        hold: f64,
    },
    Circle {
        #[serde(default = "five")]
        diameter: f64,
        #[serde(default = "one")]
        speed: f64,
    },
    /// Per-axis uniform commands in `[−magnitude, magnitude]`, redrawn every `interval`.
    Random {
        #[serde(default = "one")]
        magnitude: f64,
        #[serde(default = "ten")]
        interval: f64,
    },
    Custom {
        commands: Vec<CommandEntry>,
    },
}

fn one() -> f64 {
    1.0
}
fn five() -> f64 {
    5.0
}
fn ten() -> f64 {
    10.0
}

impl Default for ScriptSpec {
    fn default() -> Self {
        Self::DribbleAndStop { speed: 1.0, hold: 5.0 }
    }
}

impl ScriptSpec {
    pub fn build(&self, duration: f64, dt: f64, seed: u64) -> Result<CommandScript> {
        use rand::Rng;
        match self {
            Self::DribbleAndStop { speed, hold } => Ok(dribble_and_stop(*speed, *hold)),
            Self::Circle { diameter, speed } => circle_command_script(*diameter, *speed, duration, dt),
            Self::Random { magnitude, interval } => {
                if interval.is_nan() || *interval <= 0.0 {
                    return Err(Error::Config { key: "script.interval".into(), message: "must be positive".into() });
                }
                let mut rng = rng_for(seed, Stream::Commands);
                let count = (duration / interval).ceil().max(1.0) as usize;
                let mut draw = || magnitude * (2.0 * rng.gen::<f64>() - 1.0);
                let pairs: Vec<(f64, Vec2)> = (0..count).map(|k| (k as f64 * interval, Vec2::new(draw(), draw()))).collect();
                CommandScript::from_pairs(&pairs)
            }
            Self::Custom { commands } => CommandScript::new(commands.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomizationConfig {
    pub enabled: bool,
    /// Draw drag and mass from the ranges instead of `[terrain]`.
    pub terrain: bool,
    pub teleport: bool,
    pub perturbation: bool,
    pub arrival_rate: bool,
    pub ranges: RandomizationRanges,
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        Self { enabled: false, terrain: true, teleport: false, perturbation: true, arrival_rate: true, ranges: Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    /// Ball position in the robot's starting frame; the robot starts at the origin facing `+x`.
    pub ball_position: [f64; 2],
    pub ball_velocity: [f64; 2],
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { ball_position: [0.3, 0.0], ball_velocity: [0.0, 0.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    /// Per-corner Gaussian noise on detection boxes, pixels.
    pub pixel_noise: f64,
    /// Gaussian noise on the synthetic velocity estimate, m/s per axis.
    pub velocity_noise: f64,
    /// Probability that a camera frame arrives on a given step.
    pub arrival_rate: f64,
    pub ball_diameter: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self { pixel_noise: 0.5, velocity_noise: 0.1, arrival_rate: 0.5, ball_diameter: crate::perception::BALL_DIAMETER }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub focal: f64,
    pub principal_point: [f64; 2],
    pub mount_position: [f64; 3],
    /// Downward tilt of the optical axis from body `x`, radians.
    pub pitch: f64,
    pub fov: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self::front()
    }
}

impl CameraConfig {
    pub fn front() -> Self {
        Self { focal: 280.0, principal_point: [640.0, 400.0], mount_position: [0.27, 0.0, 0.02], pitch: 0.35, fov: DEFAULT_FOV }
    }

    pub fn down() -> Self {
        Self { mount_position: [0.15, 0.0, -0.05], pitch: std::f64::consts::FRAC_PI_2, ..Self::front() }
    }

    pub fn build(&self) -> Result<CameraModel> {
        CameraModel::pitched(self.focal, Vec2::from(self.principal_point), Vec3::from(self.mount_position), self.pitch)?.with_fov(self.fov)
    }
}

fn default_cameras() -> [CameraConfig; 2] {
    [CameraConfig::front(), CameraConfig::down()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    pub controller: ControllerKind,
    pub perception: PerceptionMode,
    pub terrain: TerrainParams,
    pub script: ScriptSpec,
    pub initial: InitialConfig,
    pub randomization: RandomizationConfig,
    pub feedback: FeedbackGains,
    pub gait: GaitParams,
    pub body: BodyParams,
    pub contact: ContactParams,
    pub control: ControllerParams,
    pub reward: RewardParams,
    pub noise: NoiseDiagonals,
    pub sensors: SensorConfig,
    #[serde(default = "default_cameras")]
    pub cameras: [CameraConfig; 2],
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            duration: 10.0,
            dt: 0.02,
            seed: 0,
            controller: ControllerKind::FeedbackGuided,
            perception: PerceptionMode::GroundTruth,
            terrain: TerrainParams::default(),
            script: ScriptSpec::default(),
            initial: InitialConfig::default(),
            randomization: RandomizationConfig::default(),
            feedback: FeedbackGains::default(),
            gait: GaitParams::default(),
            body: BodyParams::default(),
            contact: ContactParams::default(),
            control: ControllerParams::default(),
            reward: RewardParams::default(),
            noise: NoiseDiagonals::default(),
            sensors: SensorConfig::default(),
            cameras: default_cameras(),
        }
    }
}

fn bad(key: &str, message: impl Into<String>) -> Error {
    Error::Config { key: key.into(), message: message.into() }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be positive and finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let key = msg.split('`').nth(1).unwrap_or("config").to_string();
            bad(&key, msg.trim())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        positive("dt", self.dt)?;
        positive("duration", self.duration)?;
        if self.duration < self.dt {
            return Err(bad("duration", "must be at least dt"));
        }
        if !self.terrain.drag_coefficient.is_finite() {
            return Err(bad("terrain.drag_coefficient", "must be finite"));
        }
        positive("terrain.ball_mass", self.terrain.ball_mass)?;
        positive("body.tau", self.body.tau)?;
        positive("body.max_speed", self.body.max_speed)?;
        positive("body.yaw_rate", self.body.yaw_rate)?;
        positive("contact.radius", self.contact.radius)?;
        positive("gait.period", self.gait.period)?;
        if !(self.gait.duty_factor > 0.0 && self.gait.duty_factor < 1.0) {
            return Err(bad("gait.duty_factor", "must lie in (0, 1)"));
        }
        for (key, v) in [("feedback.k_p", self.feedback.k_p), ("feedback.k_i", self.feedback.k_i), ("feedback.k_cmd", self.feedback.k_cmd)]
        {
            if !v.is_finite() {
                return Err(bad(key, "must be finite"));
            }
        }
        positive("reward.sigma", self.reward.sigma)?;
        positive("reward.sigma_task", self.reward.sigma_task)?;
        positive("reward.sigma_prox", self.reward.sigma_prox)?;
        positive("sensors.ball_diameter", self.sensors.ball_diameter)?;
        if !(0.0..=1.0).contains(&self.sensors.arrival_rate) {
            return Err(bad("sensors.arrival_rate", "must lie in [0, 1]"));
        }
        for (i, c) in self.cameras.iter().enumerate() {
            c.build().map_err(|e| bad(&format!("cameras[{i}]"), e.to_string()))?;
        }
        crate::filter::NoiseConfig::try_from(self.noise).map_err(|e| bad("noise", e.to_string()))?;
        self.script.build(self.duration, self.dt, self.seed).map_err(|e| match e {
            Error::Config { .. } => e,
            other => bad("script", other.to_string()),
        })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ScenarioConfig::default();
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn zero_dt_names_key() {
        let err = ScenarioConfig::from_toml("dt = 0.0").unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "dt"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ScenarioConfig::from_toml("[body]\ntau = 0.2\nspeed_cap = 3.0").unwrap_err();
        assert!(err.to_string().contains("speed_cap"), "{err}");
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = ScenarioConfig::from_toml(
            "controller = \"naive\"\n[terrain]\ndrag_coefficient = 0.0\nball_mass = 0.3\n[script]\nkind = \"circle\"\n",
        )
        .unwrap();
        assert_eq!(cfg.controller, ControllerKind::NaivePursuit);
        assert_eq!(cfg.script, ScriptSpec::Circle { diameter: 5.0, speed: 1.0 });
        assert_eq!(cfg.dt, 0.02);
    }

    #[test]
    fn random_script_is_seeded() {
        let s = ScriptSpec::Random { magnitude: 1.0, interval: 10.0 };
        let a = s.build(40.0, 0.02, 3).unwrap();
        assert_eq!(a, s.build(40.0, 0.02, 3).unwrap());
        assert_eq!(a.entries().len(), 4);
        assert!(a.entries().iter().all(|e| e.cmd.iter().all(|c| c.abs() <= 1.0)));
    }
}
