//! Bingham-closure Q-tensor numerics for nematic liquid crystals.

pub mod bingham;
pub mod dynamics;
pub mod equilibria;
mod error;
pub mod leslie;
pub mod operators;
pub mod quadrature;
pub mod tensor;

pub use error::{Error, Result};
