//! Numerical experiments on the preferred-basis problem: Gaussian pointer
//! states, Gaussian-dephased density matrices, and the delocalized eigenbases
//! that diagonalizing those density matrices produces.
//!
//! - [`grid_states`]: periodic grid, wavefunctions, pointer states and frames.
//! - [`decoherence`]: density matrices and the dephasing kernel.
//! - [`spectra`]: Hermitian eigensolver, localization/parity diagnostics and
//!   closed-form record models.
//! - [`lab`]: experiment runners, configuration and CSV/JSON output.

pub mod decoherence;
pub mod error;
pub mod grid_states;
pub mod lab;
pub mod spectra;

pub use error::{Error, Result};
