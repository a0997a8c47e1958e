//! Discrete time evolution under sums of non-commuting operators.
//!
//! The crate is split along the lines of the workflow:
//!
//! * [`schemes`] holds two-operator splitting schemes, checks them, estimates
//!   their leading error terms and scores their efficiency.
//! * [`multistage`] turns a two-operator scheme into one applicable to any
//!   number of operators and builds the corresponding evolution operators.
//! * [`polyexp`] provides truncated Taylor and Chebyshev approximations of the
//!   exponential evaluated through the zeros of the polynomial.
//! * [`spinmodel`] builds the XXZ chain used as the test Hamiltonian together
//!   with the exact-diagonalization reference.
//! * [`bench`] runs error-versus-cost sweeps over all of the above.

pub mod bench;
pub mod error;
pub mod linalg;
pub mod multistage;
pub mod polyexp;
pub mod schemes;
pub mod spinmodel;
pub mod stats;
pub mod tolerance;

pub use error::{Error, Result};
pub use num_complex::Complex64;
