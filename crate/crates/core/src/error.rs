use core::fmt;

use serde::{Deserialize, Serialize};

/// Why a vision estimate could not be produced for a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    OutOfFrame,
    BehindCamera,
    Degenerate,
    GateStreak,
    Reprojection,
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InvalidReason::OutOfFrame => "out-of-frame",
            InvalidReason::BehindCamera => "behind-camera",
            InvalidReason::Degenerate => "degenerate",
            InvalidReason::GateStreak => "gate-streak",
            InvalidReason::Reprojection => "reprojection",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("numerical error: {0}")]
    Numerical(&'static str),
    #[error("trim not found after {iterations} iterations (residual {residual:e})")]
    TrimNotFound { iterations: usize, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArg(&'static str),
    #[error("configuration error: {0}")]
    Config(&'static str),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("distance {0} m is outside the vision envelope")]
    OutOfEnvelope(f64),
    #[error("point {0} is behind the camera")]
    BehindCamera(usize),
    #[error("degenerate point configuration")]
    DegenerateConfiguration,
    #[error("invalid estimate: {0}")]
    InvalidEstimate(InvalidReason),
    #[error("simulation diverged at t = {time} s: {cause}")]
    SimulationDiverged { time: f64, cause: &'static str },
    #[error("trace carries no pose estimates")]
    NoEstimates,
}

pub type Result<T> = core::result::Result<T, Error>;
