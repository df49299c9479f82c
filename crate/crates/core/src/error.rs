use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Q is not admissible (eigenvalue margin {margin:.3e})")]
    NonAdmissible { margin: f64 },
    #[error("no convergence after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("alpha = {alpha} does not exceed the critical value {alpha_star}")]
    SubCritical { alpha: f64, alpha_star: f64 },
    #[error("admissibility lost at cell {cell}, t = {time} (margin {margin:.3e})")]
    AdmissibilityLost { cell: usize, time: f64, margin: f64 },
    #[error("advective CFL number {cfl:.3} exceeds 0.5")]
    CflViolation { cfl: f64 },
    #[error("vector is not unit length (|n| = {0})")]
    NonUnitVector(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("checkpoint format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
