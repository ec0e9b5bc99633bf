//! Clifford-algebra valued fields on periodic grids: Dirac operators, gauge
//! solvers, Hodge decompositions and compensation estimates.

pub mod clifford;
pub mod compensation;
pub mod config;
pub mod dirac;
pub mod error;
mod fft;
pub mod gauge;
pub mod grid;
pub mod hodge;
pub mod nonlinear;
pub mod norms;
pub mod operator;
pub mod random;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
