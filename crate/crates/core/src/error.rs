use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("quaternion norm {norm:e} is too small to normalize")]
    DegenerateQuaternion { norm: f64 },
    #[error("quaternion norm {norm} is not within tolerance of 1")]
    NonUnitQuaternion { norm: f64 },
    #[error("vectors are antiparallel (1 + a.b = {cos_sum:e}); rotation axis is undefined")]
    AntiparallelVectors { cos_sum: f64 },
    #[error("zero-length vector cannot define a direction")]
    ZeroVector,
    #[error("rotor speed {0} rad/s is negative")]
    NegativeSpeed(f64),
    #[error("sum of rotor tilt cosines {0} is below the singularity guard")]
    TiltSingularity(f64),
    #[error("vertical acceleration demand {0} m/s^2 requires non-positive thrust")]
    NegativeThrustDemand(f64),
    #[error("state diverged: {0}")]
    NumericalDivergence(String),
    #[error("finite-difference step {0:e} is lost to cancellation")]
    StepTooSmall(f64),
    #[error("final waypoint not captured within {0} s")]
    MissionTimeout(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
