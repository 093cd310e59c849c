//! Entanglement dynamics of brick-work quantum circuits after a quench.
//!
//! The crate has two independent routes to the same quantities:
//!
//! * a brute-force **oracle** ([`circuit`] + [`entanglement`]) that evolves the
//!   full state vector and diagonalises reduced density matrices and their
//!   partial transposes;
//! * the **space-time dual** route ([`dual`]) that contracts the folded circuit
//!   sideways with a space transfer matrix and reads logarithmic negativity,
//!   negativity moments and Rényi mutual information off its fixed points.
//!
//! At early times (every subsystem at least twice as long as the elapsed time,
//! in units of two-site cells) the two routes agree exactly and the negativity
//! equals half the Rényi-1/2 mutual information. [`clifford`] adds a stabilizer
//! engine that exposes the Bell-pair/GHZ content of Clifford circuits, and
//! [`harness`] drives sweeps and writes CSV/JSON reports.
//!
//! Kernels parallelise with rayon when the `parallel` feature is on (default);
//! see [`par::Exec`].

// `!(x > 0.0)` is how positivity checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod clifford;
pub mod dual;
pub mod entanglement;
pub mod error;
pub mod harness;
mod kernel;
pub mod par;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
