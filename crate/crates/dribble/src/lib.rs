//! Control and estimation stack for legged ball dribbling, with a planar
//! simulator to exercise it.
//!
//! The pieces, roughly in the order data flows through them:
//!
//! - [`ball_dynamics`]: ball rolling under velocity-proportional drag.
//! - [`perception`]: equidistant fisheye geometry, box to ball position.
//! - [`filter`]: constant-velocity Kalman filter with masked measurement slots.
//! - [`feedback`]: the PI + command reference velocity that drives overshoot.
//! - [`gait`]: Raibert foot targets and the foot deviation penalty.
//! - [`reward`]: base task rewards and guidance shaping.
//! - [`sim`]: closed-loop planar harness, randomization and metrics.
//! - [`report`]: batch aggregation by drag bucket.

pub mod ball_dynamics;
pub mod error;
pub mod feedback;
pub mod filter;
pub mod gait;
pub mod perception;
pub mod report;
pub mod reward;
pub mod sim;

pub use error::{Error, Result};

/// Planar vector in metres or metres per second, world frame unless noted.
pub type Vec2 = nalgebra::Vector2<f64>;
