//! Ball rolling on terrain with linear drag, `p̈ = −C_D ṗ`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::Vec2;

/// Below this drag magnitude the position update uses the `p + v·dt` limit.
pub const ZERO_DRAG_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallState {
    pub position: Vec2,
    pub velocity: Vec2,
}

impl BallState {
    pub fn new(position: Vec2, velocity: Vec2) -> Self {
        Self { position, velocity }
    }

    pub fn at_rest(position: Vec2) -> Self {
        Self::new(position, Vec2::zeros())
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(self.velocity.iter()).all(|v| v.is_finite())
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TerrainParams {
    pub drag_coefficient: f64,
    pub ball_mass: f64,
}

impl TerrainParams {
    pub fn new(drag_coefficient: f64, ball_mass: f64) -> Result<Self> {
        ensure_finite("terrain parameters", &[drag_coefficient, ball_mass])?;
        if ball_mass <= 0.0 {
            return Err(Error::InvalidInput(format!("ball mass must be positive, got {ball_mass}")));
        }
        Ok(Self { drag_coefficient, ball_mass })
    }
}

impl Default for TerrainParams {
    fn default() -> Self {
        Self { drag_coefficient: 0.2, ball_mass: 0.3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    /// Velocity decays, the ball always stops.
    Stable,
    /// Velocity is constant, the ball coasts forever.
    Marginal,
    /// Velocity grows without bound.
    Unstable,
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Stable => "Stable",
            Self::Marginal => "Marginal",
            Self::Unstable => "Unstable",
        };
        f.write_str(name)
    }
}

pub fn drag_accel(velocity: Vec2, c_d: f64) -> Result<Vec2> {
    ensure_finite("drag inputs", &[velocity.x, velocity.y, c_d])?;
    Ok(-c_d * velocity)
}

/// Advances the ball by `dt` along the exact solution of the linear flow.
pub fn step(state: &BallState, c_d: f64, dt: f64) -> Result<BallState> {
    ensure_finite("step inputs", &[c_d, dt])?;
    if dt < 0.0 {
        return Err(Error::InvalidInput(format!("dt must be non-negative, got {dt}")));
    }
    let decay = (-c_d * dt).exp();
    let travel = if c_d.abs() < ZERO_DRAG_EPS {
        dt
    } else {
        // -expm1 keeps (1 - e^{-x}) accurate for small x
        -(-c_d * dt).exp_m1() / c_d
    };
    Ok(BallState { position: state.position + state.velocity * travel, velocity: state.velocity * decay })
}

pub fn classify_stability(c_d: f64) -> StabilityClass {
    if c_d > 0.0 {
        StabilityClass::Stable
    } else if c_d < 0.0 {
        StabilityClass::Unstable
    } else {
        StabilityClass::Marginal
    }
}

/// Eigenvalues of the state matrix `[[0, I], [0, −C_D I]]`, one per distinct value.
pub fn eigenvalues(c_d: f64) -> [f64; 2] {
    // adding 0.0 turns -0.0 into 0.0 for display
    [0.0, -c_d + 0.0]
}
