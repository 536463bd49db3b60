use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("pixel is out of view: polar angle {theta:.4} rad exceeds {limit:.4} rad")]
    OutOfView { theta: f64, limit: f64 },

    #[error("ray does not intersect the ball plane")]
    NoIntersection,

    #[error("cannot initialize filter: no detection available")]
    CannotInitialize,

    #[error("innovation covariance is numerically singular")]
    FilterDegenerate,

    #[error("simulation diverged at step {step}")]
    SimulationDiverged { step: usize },

    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be finite")))
    }
}
