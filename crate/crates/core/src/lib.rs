//! Numerics for mutually interacting Brownian occupation measures.
//!
//! The crate has four layers:
//!
//! - [`measures`]: atomic measures, mollified densities, interaction
//!   energies, and the Donsker-Varadhan rate functional.
//! - [`compactify`]: concentration functions, greedy mass peeling into
//!   widely separated components, pair matching into orbit collections, and
//!   the metric that compares them.
//! - [`simulate`]: Brownian path sampling, mollified intersection masses,
//!   Gibbs reweighting, and Monte Carlo estimators for partition functions
//!   and smoothed-noise moment exponents.
//! - [`variational`]: radial grid solvers for the free-energy formulas the
//!   simulations are compared against.
//!
//! [`experiments`] wires the layers into the scripted pipelines the CLI
//! exposes, and [`fixtures`] holds the deterministic inputs they run on.

pub mod compactify;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod measures;
pub mod rng;
pub mod simulate;
pub mod variational;

pub use error::{Error, Result};
pub use measures::{
    dv_rate, mollify, pairwise_energy, AtomicMeasure, GridDensity, GridSpec, Kernel,
    MollifierKind, MollifierSpec, PreparedKernel, RadialTable,
};

/// Version string recorded in run manifests and result files.
pub const VERSION: &str = concat!("occupath-", env!("CARGO_PKG_VERSION"));
