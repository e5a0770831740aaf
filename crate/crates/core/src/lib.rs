//! Continuous-time search for one marked item with a Hamiltonian oracle that
//! dephases in the winner basis.
//!
//! Dense complex matrices and an RK4 integrator for the Lindblad and
//! Schrödinger equations, the search model itself, an exact 2×2 reduction,
//! the progress measure with its growth-rate bound, and a stochastic
//! unraveling of the dephasing channel.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod matrix;
pub mod progress;
pub mod quantum;
pub mod search;

pub type C64 = num_complex::Complex64;

pub use error::{Error, Invariant, Result};
pub use matrix::CMatrix;
pub use quantum::{DensityMatrix, HermitianOperator, PureState};
pub use search::{Driver, ReducedModel, SearchModel};
