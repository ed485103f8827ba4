use thiserror::Error;

use crate::geom::Vec2;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("kernel evaluated at its singularity")]
    Singularity,

    #[error("curve is not regular: minimum speed {min_speed:e}")]
    Regularity { min_speed: f64 },

    #[error("point ({}, {}) lies within {distance:e} of a curve", point.x, point.y)]
    Proximity { point: Vec2, distance: f64 },

    #[error("rasterization failed: {0}")]
    Rasterization(String),

    #[error("raster spacing {h} under-resolves the kernel; need h <= {required_h}")]
    Resolution { h: f64, required_h: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("curve self-intersection detected at step {step}")]
    Topology { step: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by bad user input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::InvalidInput(_) | Error::Json(_) | Error::Io(_)
        )
    }
}

pub(crate) fn ensure_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}
