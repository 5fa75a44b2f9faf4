//! Numerical laboratory for the central limit theorem obeyed by linear
//! combinations of iterates of inner functions.
//!
//! The library works with finite Blaschke products fixing the origin — the
//! only class of inner functions with an exact finite representation — and
//! provides:
//!
//! * exact evaluation of products, iterates, derivatives and Taylor data
//!   ([`blaschke`]),
//! * circle quadrature: equispaced grids, reproducible Monte Carlo and
//!   orbit-based correlation integrals ([`quad`]),
//! * certified spectral evaluation of iterate correlations via power-series
//!   composition ([`spectral`]) and an exact Clark-reduction evaluator
//!   ([`correlations::reduce`]),
//! * Aleksandrov–Clark measures with moment and disintegration checks
//!   ([`clark`]),
//! * coefficient sequences and their variance statistics ([`sequences`]),
//! * the constructive block decomposition of index ranges ([`blocks`]),
//! * correlation-identity verification suites ([`correlations`]),
//! * the statistical harness testing normalized partial sums against the
//!   standard complex normal ([`harness`]).

pub mod blaschke;
pub mod blocks;
pub mod clark;
pub mod config;
pub mod correlations;
pub mod error;
pub mod harness;
pub mod poly;
pub mod quad;
pub mod sequences;
pub mod spectral;
pub mod util;

pub use blaschke::BlaschkeProduct;
pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
