//! Planar closed-loop dribbling harness.

pub mod bench;
pub mod body;
pub mod commands;
pub mod config;
pub mod contact;
pub mod controller;
pub mod randomization;
pub mod record;
pub mod scenario;

pub use bench::{filter_bench, BenchReport, BenchSource};
pub use config::{PerceptionMode, ScenarioConfig, ScriptSpec};
pub use controller::ControllerKind;
pub use record::{Metrics, TrajectoryRecord, TrajectoryRow};
pub use scenario::{resolved_terrain, run_scenario, RunOutput};
