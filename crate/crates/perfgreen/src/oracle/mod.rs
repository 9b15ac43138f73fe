//! Ground-truth reference solvers.
//!
//! Two independent routes to the perforated-domain Green's function: a
//! separation-of-variables series for concentric ball/disk scenes and a
//! fundamental-solution collocation solver for general ones. The study
//! harness cross-validates them against each other before trusting either.

pub mod collocation;
pub mod series;

pub use collocation::{CollocationOracle, CollocationOracleOptions, ORACLE_RESIDUAL_TOL};
pub use series::AnnulusSeries;
