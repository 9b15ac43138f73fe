//! Uniform small-hole asymptotics for Dirichlet Green's functions.
//!
//! This crate evaluates Green's functions of `-Δ` (zero Dirichlet data) in a
//! ball or disk from which a small hole has been removed, using compound
//! asymptotic expansions that stay accurate *uniformly* over the whole
//! perforated domain — in the bulk, next to the hole, next to the outer
//! boundary, and across the diagonal singularity. Alongside the expansions it
//! ships two independent reference solvers (a separation-of-variables series
//! for concentric scenes and a fundamental-solution collocation solver for
//! general ones) and a study harness that measures remainders, fits
//! convergence orders, and certifies the expected error behaviour.
//!
//! Modules:
//!
//! - [`geometry`]: the perforated-domain scene, its normalization, and
//!   stratified sampling of admissible evaluation points.
//! - [`outer`]: closed-form Green's function and regular part of the
//!   unperturbed ball/disk via the method of images.
//! - [`hole`]: unit-scale exterior quantities of the hole — exterior Green's
//!   function, equilibrium potential, capacity, and the planar quantities
//!   `ζ`, `ζ_∞`, and the inner conformal radius.
//! - [`asymptotics`]: the assembled uniform expansions, the planar
//!   equilibrium-potential approximation, and the simplified far/near
//!   formulas with their validity regions.
//! - [`oracle`]: ground-truth solvers used to measure remainders.
//! - [`study`]: sweeps, order fits, lemma verification, and CSV reports.

pub mod asymptotics;
pub mod config;
pub mod geometry;
pub mod hole;
pub mod oracle;
pub mod outer;
pub mod solver;
pub mod study;

pub use asymptotics::{Scene, UniformExpansion};
pub use geometry::{DimensionConstants, HoleShape, PerforationConfig, Point, Stratum};
pub use hole::HoleKernel;
pub use outer::OuterKernel;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("dimension: {0}")]
    Dimension(String),
    #[error("point outside admissible region: {0}")]
    OutsideDomain(String),
    #[error("coincident evaluation points")]
    CoincidentPoints,
    #[error("sampling: {0}")]
    Sampling(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("validity region violated: {0}")]
    ValidityRegion(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
