use thiserror::Error;

use crate::tanks::{ConversionKind, TankShape};
use crate::Mode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("coupled coils rejected: {0}")]
    InvalidCoupling(String),

    #[error("compensation network must contain at least one stage")]
    EmptyNetwork,

    #[error("shunt stage {index} has zero impedance at {omega} rad/s")]
    SingularStage { index: usize, omega: f64 },

    #[error("input port is open-circuit resonant at {omega} rad/s (|c*R_ac + d| below threshold)")]
    OpenCircuitResonance { omega: f64 },

    #[error("input port is short-circuit resonant at {omega} rad/s (|a*R_ac + b| below threshold)")]
    ShortCircuitResonance { omega: f64 },

    #[error("degenerate parallel combination in {what}: denominator vanishes")]
    DegenerateParallel { what: &'static str },

    #[error("degenerate T-network: X_1s + X_p = 0")]
    DegenerateTee,

    #[error("{shape:?} tank cannot realise a {target:?} conversion")]
    TankMismatch { shape: TankShape, target: ConversionKind },

    #[error("reactances evaluated in {found:?} mode, {expected:?} required")]
    ModeMismatch { expected: Mode, found: Mode },

    #[error("invalid search bounds for {name}: lower {lower} must be positive and below upper {upper}")]
    InvalidBounds { name: &'static str, lower: f64, upper: f64 },

    #[error("load list is empty")]
    NoLoads,

    #[error("frequency grid is empty")]
    EmptyGrid,
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
