//! Time integration of the closed Q-tensor system and its director-theory limit.

pub mod checkpoint;
pub mod director;
mod energy;
pub mod etd;
mod field;
pub mod homogeneous;
pub mod limit;
pub mod noperator;
mod params;
mod spectral;

pub use energy::{measured_dissipation, EnergyReport};
pub use field::{CoupledSolver, FieldState, SolverOptions, StepInfo};
pub use params::{FlowParams, TraceVariant};
pub use spectral::Grid;
