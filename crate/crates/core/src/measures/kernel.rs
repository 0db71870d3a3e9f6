//! Interaction kernels and pairwise energies.
//!
//! `pairwise_energy(mu, nu, V) = sum_i sum_j w_i w_j V(x_i - y_j)` is the
//! mutual interaction of two atomic measures. Compactly supported kernels
//! use a cell-list neighbor search; accumulation is in a fixed order (outer
//! index, then lexicographic neighbor cells) so results do not depend on
//! thread count.

use super::{AtomicMeasure, MollifierSpec};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Uniformly sampled radial function, linearly interpolated, zero beyond the
/// last sample. Serves both as user-tabulated interaction kernel and as the
/// numeric self-convolution of bump mollifiers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialTable {
    step: f64,
    values: Vec<f64>,
}

impl RadialTable {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || values.len() < 2 {
            return Err(Error::InvalidParameter(
                "radial table needs step > 0 and at least two samples".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("radial table value"));
        }
        Ok(Self { step, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_radius(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    pub fn value_radial(&self, r: f64) -> f64 {
        if r < 0.0 {
            return self.value_radial(-r);
        }
        let t = r / self.step;
        let i = t as usize;
        if i + 1 >= self.values.len() {
            return 0.0;
        }
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// Kernel descriptor accepted by the pairwise energy.
#[derive(Clone, Debug)]
pub enum Kernel {
    /// `V_eps = phi_eps * phi_eps` for the given mollifier.
    MollifiedDelta(MollifierSpec),
    /// `V_delta(x) = (delta^2 + |x|^2)^{-1/2}`; `delta = 0` is the exact
    /// Coulomb kernel and is rejected on coincident atoms.
    RegularizedCoulomb { delta: f64 },
    /// User-tabulated radial kernel, compactly supported.
    Tabulated(RadialTable),
    /// Identically zero.
    Zero,
}

impl Kernel {
    /// Bind the kernel to a spatial dimension, precomputing what evaluation
    /// needs (self-convolutions, normalizations).
    pub fn prepare(&self, dim: usize) -> Result<PreparedKernel> {
        let form = match self {
            Kernel::MollifiedDelta(spec) => PreparedForm::Pair(spec.pair_kernel(dim)?),
            Kernel::RegularizedCoulomb { delta } => {
                if !delta.is_finite() || *delta < 0.0 {
                    return Err(Error::InvalidParameter(format!("coulomb delta {delta}")));
                }
                PreparedForm::Coulomb { delta2: delta * delta }
            }
            Kernel::Tabulated(table) => PreparedForm::Table(table.clone()),
            Kernel::Zero => PreparedForm::Zero,
        };
        Ok(PreparedKernel { dim, form })
    }
}

#[derive(Clone, Debug)]
enum PreparedForm {
    Pair(super::mollifier::PairKernel),
    Coulomb { delta2: f64 },
    Table(RadialTable),
    Zero,
}

/// A kernel bound to a dimension, ready for evaluation at squared distances.
#[derive(Clone, Debug)]
pub struct PreparedKernel {
    dim: usize,
    form: PreparedForm,
}

impl PreparedKernel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Support radius, `None` when the kernel never vanishes.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.form {
            PreparedForm::Pair(p) => Some(p.support_radius()),
            PreparedForm::Coulomb { .. } => None,
            PreparedForm::Table(t) => Some(t.support_radius()),
            PreparedForm::Zero => Some(0.0),
        }
    }

    pub fn value_r2(&self, r2: f64) -> f64 {
        match &self.form {
            PreparedForm::Pair(p) => p.value_r2(r2),
            PreparedForm::Coulomb { delta2 } => 1.0 / (delta2 + r2).sqrt(),
            PreparedForm::Table(t) => t.value_radial(r2.sqrt()),
            PreparedForm::Zero => 0.0,
        }
    }

    pub fn value_radial(&self, r: f64) -> f64 {
        self.value_r2(r * r)
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Reference double loop, kept as an independent check of the cell-list
/// path.
pub fn pairwise_energy_naive(
    mu: &AtomicMeasure,
    nu: &AtomicMeasure,
    kernel: &PreparedKernel,
) -> Result<f64> {
    check_dims(mu, nu, kernel)?;
    let mut total = 0.0;
    for (x, wx) in mu.iter() {
        let mut row = 0.0;
        for (y, wy) in nu.iter() {
            row += wy * kernel.value_r2(dist2(x, y));
        }
        total += wx * row;
    }
    finite_or_singular(total)
}

fn check_dims(mu: &AtomicMeasure, nu: &AtomicMeasure, kernel: &PreparedKernel) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    if kernel.dim() != mu.dim() {
        return Err(Error::DimMismatch {
            expected: mu.dim(),
            got: kernel.dim(),
        });
    }
    Ok(())
}

fn finite_or_singular(total: f64) -> Result<f64> {
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::SingularKernel(
            "kernel singular on coincident atoms; use delta > 0".into(),
        ))
    }
}

const PARALLEL_THRESHOLD: usize = 2048;

/// `sum_i sum_j w_i w_j V(x_i - y_j)`.
///
/// Compactly supported kernels are accelerated with a cell list over `nu`;
/// the reduction is an ordered per-`i` sum either way.
pub fn pairwise_energy(
    mu: &AtomicMeasure,
    nu: &AtomicMeasure,
    kernel: &PreparedKernel,
) -> Result<f64> {
    check_dims(mu, nu, kernel)?;
    let use_cells = match kernel.support_radius() {
        Some(r) if r > 0.0 => mu.len().min(nu.len()) >= 64,
        Some(_) => return Ok(0.0), // zero kernel
        None => false,
    };
    let total = if use_cells {
        let cells = CellIndex::build(nu, kernel.support_radius().unwrap());
        let row = |i: usize| -> f64 {
            let x = mu.location(i);
            let mut s = 0.0;
            cells.for_neighbors(x, |j| {
                s += nu.weight(j) * kernel.value_r2(dist2(x, nu.location(j)));
            });
            mu.weight(i) * s
        };
        ordered_sum(mu.len(), row)
    } else {
        let row = |i: usize| -> f64 {
            let x = mu.location(i);
            let mut s = 0.0;
            for (y, wy) in nu.iter() {
                s += wy * kernel.value_r2(dist2(x, y));
            }
            mu.weight(i) * s
        };
        ordered_sum(mu.len(), row)
    };
    finite_or_singular(total)
}

/// Parallel map over `0..n` followed by a sequential index-order sum, so the
/// result is independent of the worker pool.
fn ordered_sum(n: usize, row: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    if n >= PARALLEL_THRESHOLD {
        let rows: Vec<f64> = (0..n).into_par_iter().map(row).collect();
        rows.iter().sum()
    } else {
        (0..n).map(row).sum()
    }
}

/// Uniform-grid spatial index over the atoms of one measure.
pub(crate) struct CellIndex {
    dim: usize,
    cell: f64,
    origin: Vec<f64>,
    map: HashMap<[i64; 4], Vec<usize>>,
}

impl CellIndex {
    pub(crate) fn build(measure: &AtomicMeasure, cell: f64) -> Self {
        let dim = measure.dim();
        assert!(dim <= 4, "cell index supports dims 1..=4");
        let (lo, _) = measure.bounding_box();
        let mut map: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
        for i in 0..measure.len() {
            let key = Self::key_of(dim, cell, &lo, measure.location(i));
            map.entry(key).or_default().push(i);
        }
        Self {
            dim,
            cell,
            origin: lo,
            map,
        }
    }

    fn key_of(dim: usize, cell: f64, origin: &[f64], x: &[f64]) -> [i64; 4] {
        let mut key = [0i64; 4];
        for k in 0..dim {
            key[k] = ((x[k] - origin[k]) / cell).floor() as i64;
        }
        key
    }

    /// Visit atoms in the 3^d neighborhood of the cell containing `x`, in
    /// lexicographic cell order and ascending index within each cell.
    pub(crate) fn for_neighbors(&self, x: &[f64], mut visit: impl FnMut(usize)) {
        let center = Self::key_of(self.dim, self.cell, &self.origin, x);
        let mut offset = [-1i64; 4];
        loop {
            let mut key = center;
            for k in 0..self.dim {
                key[k] += offset[k];
            }
            if let Some(atoms) = self.map.get(&key) {
                for &j in atoms {
                    visit(j);
                }
            }
            // odometer over {-1,0,1}^dim
            let mut k = 0;
            loop {
                if k == self.dim {
                    return;
                }
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
        }
    }

}
