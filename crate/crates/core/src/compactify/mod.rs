//! Concentration-compactness machinery for pairs of measures.
//!
//! A sequence of (sub-)probability measures can lose compactness two ways:
//! mass escaping in different directions, or mass spreading so thin that no
//! ball retains any ("dust"). [`decompose`] peels a measure into widely
//! separated components plus dust; [`match_pairs`] pairs the components of
//! two decompositions that stay within bounded distance of each other and
//! re-centers each pair modulo its common shift. The result is an
//! [`OrbitCollection`], on which the interaction functionals and the metric
//! [`metric_d`] are evaluated.

mod matching;
mod metric;
mod peel;

pub use matching::match_pairs;
pub use metric::{
    h_energy, lambda_functional, metric_d, Level, MetricValue, TestFunction, TestFunctionFamily,
};
pub use peel::{
    concentration, decompose, ConcentrationCurve, DecomposeParams, DEFAULT_MASS_FLOOR,
    DEFAULT_SEPARATION_FACTOR,
};

use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use serde::{Deserialize, Serialize};

/// One peeled component: all atoms within the peel radius of `center`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Component {
    pub center: Vec<f64>,
    pub mass: f64,
    /// Atom subset in original coordinates.
    pub atoms: AtomicMeasure,
}

/// Peeling result: components in decreasing mass order plus the leftover
/// dust mass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Decomposition {
    pub dim: usize,
    pub params: DecomposeParams,
    pub input_mass: f64,
    pub components: Vec<Component>,
    pub dust_mass: f64,
}

impl Decomposition {
    /// Component masses plus dust must reproduce the input mass.
    pub fn mass_conserved(&self) -> bool {
        let total: f64 = self.components.iter().map(|c| c.mass).sum::<f64>() + self.dust_mass;
        (total - self.input_mass).abs() <= 1e-9
    }

    pub fn write_json<W: std::io::Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }
}

/// A matched pair of sub-probability measures modulo a common shift:
/// `alpha` re-centered at the origin, `beta` re-centered at its own center
/// and carrying the relative shift between the two centers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitPair {
    pub alpha: AtomicMeasure,
    pub beta: AtomicMeasure,
    pub relative_shift: Vec<f64>,
}

/// A finite collection of matched pairs with total masses at most one on
/// each side.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitCollection {
    pub dim: usize,
    pub pairs: Vec<OrbitPair>,
}

impl OrbitCollection {
    pub fn new(dim: usize, pairs: Vec<OrbitPair>) -> Result<Self> {
        let tol = crate::measures::SUBPROB_TOL;
        let alpha_mass: f64 = pairs.iter().map(|p| p.alpha.total_mass()).sum();
        let beta_mass: f64 = pairs.iter().map(|p| p.beta.total_mass()).sum();
        if alpha_mass > 1.0 + tol || beta_mass > 1.0 + tol {
            return Err(Error::MassConstraint(format!(
                "orbit collection masses ({alpha_mass}, {beta_mass}) exceed 1"
            )));
        }
        for p in &pairs {
            if p.alpha.dim() != dim || p.beta.dim() != dim || p.relative_shift.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: p.alpha.dim(),
                });
            }
        }
        Ok(Self { dim, pairs })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, pairs: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Coarsen every side of every pair onto cells of side `h` (see
    /// [`AtomicMeasure::coarsened`]); relative shifts are untouched. Metric
    /// evaluations on large sampled collections go through this first.
    pub fn coarsened(&self, h: f64) -> Result<Self> {
        let pairs = self
            .pairs
            .iter()
            .map(|p| {
                Ok(OrbitPair {
                    alpha: p.alpha.coarsened(h)?,
                    beta: p.beta.coarsened(h)?,
                    relative_shift: p.relative_shift.clone(),
                })
            })
            .collect::<Result<_>>()?;
        Self::new(self.dim, pairs)
    }

    pub fn write_json<W: std::io::Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(reader: R) -> Result<Self> {
        let raw: OrbitCollection = serde_json::from_reader(reader)?;
        Self::new(raw.dim, raw.pairs)
    }
}
