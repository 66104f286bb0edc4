use thiserror::Error;

use crate::measurement::Stage;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch between wave function and basis")]
    GridMismatch,

    #[error("domain too small: state {n} has boundary amplitude {amplitude:.3e} > {limit:.0e}")]
    DomainTooSmall { n: usize, amplitude: f64, limit: f64 },

    #[error("truncation inadequate: captured norm fraction {captured:.12} < {required:.12}")]
    TruncationInadequate { captured: f64, required: f64 },

    #[error("wave function not normalized (discrete norm {norm:.12})")]
    Unnormalized { norm: f64 },

    #[error("near node at {at}: |psi| = {amplitude:.3e} below floor {floor:.3e}")]
    NearNode { at: String, amplitude: f64, floor: f64 },

    #[error("position {x} outside the usable interior [{min}, {max}]")]
    OutOfDomain { x: f64, min: f64, max: f64 },

    #[error("step size underflow at t = {t} (h = {step:.3e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("paraxial window violated: |x| = {x} > {limit}")]
    ParaxialViolation { x: f64, limit: f64 },

    #[error("trajectory left the paraxial window at t = {t}")]
    WindowExit { t: f64 },

    #[error("operation requires stage {expected}, state is at {found}")]
    WrongStage { expected: Stage, found: Stage },
}
