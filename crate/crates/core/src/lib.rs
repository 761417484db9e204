//! Iterative solution of rectangular and rank-deficient linear systems
//! `Ax = b` through proper splittings `A = U - V` and alternating
//! two-splitting iterations built on the Moore-Penrose inverse.
//!
//! The crate also turns the convergence, classification and comparison
//! results of proper splitting theory into executable predicates, so that
//! they can be checked on concrete matrices:
//!
//! - [`matcore`]: dense matrices, pseudoinverse, projectors, entrywise order.
//! - [`spectral`]: spectral radius, spectra, Perron pairs.
//! - [`splitting`]: proper splittings, their classes and the single-splitting theorems.
//! - [`alternate`]: the alternating scheme, its induced splitting and comparisons.
//! - [`solver`]: the stationary iteration engine and solution verification.
//! - [`cli`]: MatrixMarket I/O, reports, pinned example suite, random generators.

pub mod alternate;
pub mod cli;
pub mod error;
pub mod matcore;
pub mod solver;
pub mod spectral;
pub mod splitting;

pub use error::{Error, Result};
pub use matcore::{Matrix, Tolerances};
