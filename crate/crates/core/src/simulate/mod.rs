//! Brownian path sampling and occupation measures.

mod estimate;
mod gibbs;

pub use estimate::{
    estimate_log_partition, estimate_pam_moment, gibbs_reweighted_decomposition, log_mean_exp,
    GibbsLocalizationSummary, LocalizationParams, MCEstimate, DEFAULT_STEP_BUDGET,
};
pub use gibbs::{
    default_dt, gibbs_weight, intersection_mass, intersection_mass_with_kernel,
    pam_exponent_with, time_weighted_measure, GibbsModel,
};

use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use rand_distr::{Distribution, StandardNormal};

/// A discretized Wiener path: `positions[k]` is the location after `k`
/// Euler steps of size `dt`.
#[derive(Clone, Debug)]
pub struct BrownianPath {
    dim: usize,
    dt: f64,
    start: Vec<f64>,
    /// Flat row-major storage, `steps + 1` positions.
    positions: Vec<f64>,
}

impl BrownianPath {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.len() - 1
    }

    /// `steps * dt`.
    pub fn horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn position(&self, k: usize) -> &[f64] {
        &self.positions[k * self.dim..(k + 1) * self.dim]
    }

    pub fn positions(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.positions.chunks_exact(self.dim)
    }

    /// Build from explicit positions (test doubles, rescalings).
    pub fn from_positions(dim: usize, dt: f64, positions: Vec<f64>) -> Result<Self> {
        if dim == 0 || !(dt > 0.0) || positions.len() < 2 * dim || positions.len() % dim != 0 {
            return Err(Error::InvalidParameter("bad path data".into()));
        }
        let start = positions[..dim].to_vec();
        Ok(Self {
            dim,
            dt,
            start,
            positions,
        })
    }

    /// Spatial scaling `W -> W / c` with the time step divided by `c^2`
    /// (Brownian rescaling of the same underlying increments).
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("rescale factor {c}")));
        }
        Self::from_positions(
            self.dim,
            self.dt / (c * c),
            self.positions.iter().map(|x| x / c).collect(),
        )
    }
}

/// Sample a Brownian path of horizon `t` with Euler steps `sqrt(dt) N(0, I)`
/// from the RNG stream `(seed, replica, role)`.
///
/// The step count is `round(t / dt)`; the recorded horizon is
/// `steps * dt`.
pub fn sample_path(
    dim: usize,
    t: f64,
    dt: f64,
    start: &[f64],
    seed: u64,
    replica: u64,
    role: u64,
) -> Result<BrownianPath> {
    if dim == 0 || start.len() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            got: start.len(),
        });
    }
    if !(dt > 0.0) || !(t > 0.0) || dt > t {
        return Err(Error::InvalidParameter(format!("t {t}, dt {dt}")));
    }
    let steps = (t / dt).round() as usize;
    if steps == 0 {
        return Err(Error::InvalidParameter("t/dt rounds to zero steps".into()));
    }
    let mut rng = crate::rng::stream(seed, replica, role);
    let sd = dt.sqrt();
    let mut positions = Vec::with_capacity((steps + 1) * dim);
    positions.extend_from_slice(start);
    for k in 0..steps {
        for j in 0..dim {
            let g: f64 = StandardNormal.sample(&mut rng);
            let prev = positions[k * dim + j];
            positions.push(prev + sd * g);
        }
    }
    Ok(BrownianPath {
        dim,
        dt,
        start: start.to_vec(),
        positions,
    })
}

/// Normalized occupation measure of the path: atoms at the recorded
/// positions, trapezoidal time weights (half weight at both endpoints),
/// total mass 1.
pub fn occupation(path: &BrownianPath) -> Result<AtomicMeasure> {
    let n = path.steps();
    if n == 0 {
        return Err(Error::EmptyMeasure);
    }
    let w = 1.0 / n as f64;
    let mut weights = vec![w; n + 1];
    weights[0] = 0.5 * w;
    weights[n] = 0.5 * w;
    AtomicMeasure::new(path.dim(), path.positions.clone(), weights)
}
