//! Grid densities: mollified measures and the Donsker-Varadhan energy.

use super::{AtomicMeasure, MollifierSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform node grid `x = origin + i * spacing` per axis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub spacing: f64,
    pub origin: Vec<f64>,
    pub shape: Vec<usize>,
}

impl GridSpec {
    pub fn new(dim: usize, spacing: f64, origin: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        if dim == 0 || origin.len() != dim || shape.len() != dim {
            return Err(Error::InvalidParameter("grid spec shape mismatch".into()));
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("spacing {spacing}")));
        }
        if shape.iter().any(|&n| n < 2) {
            return Err(Error::InvalidParameter(
                "grid needs at least 2 nodes per axis".into(),
            ));
        }
        Ok(Self {
            dim,
            spacing,
            origin,
            shape,
        })
    }

    /// Smallest grid covering the measure support inflated by
    /// `padding` on every side.
    pub fn covering(measure: &AtomicMeasure, padding: f64, spacing: f64) -> Result<Self> {
        let (lo, hi) = measure.bounding_box();
        let dim = measure.dim();
        let mut origin = Vec::with_capacity(dim);
        let mut shape = Vec::with_capacity(dim);
        for k in 0..dim {
            let a = lo[k] - padding - spacing;
            let b = hi[k] + padding + spacing;
            let n = ((b - a) / spacing).ceil() as usize + 1;
            origin.push(a);
            shape.push(n.max(2));
        }
        Self::new(dim, spacing, origin, shape)
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dim];
        for k in (0..self.dim.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.shape[k + 1];
        }
        strides
    }

    pub fn node(&self, coords: &[usize]) -> Vec<f64> {
        coords
            .iter()
            .zip(&self.origin)
            .map(|(&i, &o)| o + i as f64 * self.spacing)
            .collect()
    }

    fn extent(&self, k: usize) -> f64 {
        (self.shape[k] - 1) as f64 * self.spacing
    }
}

/// Nonnegative density sampled on a [`GridSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridDensity {
    pub spec: GridSpec,
    /// Row-major node values.
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidParameter(format!(
                "value count {} does not match grid size {}",
                values.len(),
                spec.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite("grid density value"));
        }
        Ok(Self { spec, values })
    }

    /// `h^d * sum(values)`.
    pub fn mass(&self) -> f64 {
        let hd = self.spec.spacing.powi(self.spec.dim as i32);
        hd * self.values.iter().sum::<f64>()
    }

    pub fn write_json<W: std::io::Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(reader: R) -> Result<Self> {
        let raw: GridDensity = serde_json::from_reader(reader)?;
        Self::new(raw.spec, raw.values)
    }
}

/// Sample `sum_atoms w * phi_eps(x - atom)` on the grid nodes.
///
/// Preconditions: `spacing <= eps / 2`, and the grid box must contain every
/// atom inflated by the mollifier support.
pub fn mollify(
    measure: &AtomicMeasure,
    spec: &MollifierSpec,
    grid: &GridSpec,
) -> Result<GridDensity> {
    if grid.dim != measure.dim() {
        return Err(Error::DimMismatch {
            expected: measure.dim(),
            got: grid.dim,
        });
    }
    if grid.spacing > spec.epsilon / 2.0 {
        return Err(Error::GridTooCoarse {
            spacing: grid.spacing,
            limit: spec.epsilon / 2.0,
        });
    }
    let phi = spec.density(grid.dim)?;
    let support = phi.support_radius();
    for (x, _) in measure.iter() {
        for k in 0..grid.dim {
            if x[k] - support < grid.origin[k] || x[k] + support > grid.origin[k] + grid.extent(k)
            {
                return Err(Error::OutOfDomain {
                    position: x.to_vec(),
                });
            }
        }
    }

    let strides = grid.strides();
    let h = grid.spacing;
    let mut values = vec![0.0; grid.len()];
    let dim = grid.dim;
    let mut lo = vec![0usize; dim];
    let mut hi = vec![0usize; dim];
    let mut coords = vec![0usize; dim];
    for (x, w) in measure.iter() {
        for k in 0..dim {
            let a = ((x[k] - support - grid.origin[k]) / h).ceil().max(0.0) as usize;
            let b = ((x[k] + support - grid.origin[k]) / h).floor() as usize;
            lo[k] = a;
            hi[k] = b.min(grid.shape[k] - 1);
        }
        coords.copy_from_slice(&lo);
        'window: loop {
            let mut idx = 0usize;
            let mut r2 = 0.0;
            for k in 0..dim {
                idx += coords[k] * strides[k];
                let d = grid.origin[k] + coords[k] as f64 * h - x[k];
                r2 += d * d;
            }
            values[idx] += w * phi.value_radial(r2.sqrt());
            for k in (0..dim).rev() {
                coords[k] += 1;
                if coords[k] <= hi[k] {
                    continue 'window;
                }
                coords[k] = lo[k];
                if k == 0 {
                    break 'window;
                }
            }
        }
    }
    GridDensity::new(grid.clone(), values)
}

/// Default cap on the discrete gradient energy, beyond which the density is
/// declared to have no square-root in H^1.
pub const DEFAULT_GRADIENT_CAP: f64 = 1e12;

/// Donsker-Varadhan rate `I = 1/2 * ||grad sqrt(density)||_2^2` with the
/// default energy cap.
pub fn dv_rate(density: &GridDensity) -> Result<f64> {
    dv_rate_with_cap(density, DEFAULT_GRADIENT_CAP)
}

/// Donsker-Varadhan rate with an explicit cap; returns `f64::INFINITY` when
/// the discrete gradient energy exceeds it.
///
/// The gradient of `f = sqrt(values)` uses centered differences on interior
/// nodes and one-sided differences at the boundary; the energy is
/// `sum_nodes |grad f|^2 * h^d`.
pub fn dv_rate_with_cap(density: &GridDensity, cap: f64) -> Result<f64> {
    let mass = density.mass();
    if !(mass > 0.0) {
        return Err(Error::ZeroDensity);
    }
    if mass > 1.0 + crate::measures::SUBPROB_TOL {
        return Err(Error::MassConstraint(format!(
            "dv_rate expects a sub-probability density, mass {mass}"
        )));
    }
    let spec = &density.spec;
    let f: Vec<f64> = density.values.iter().map(|v| v.sqrt()).collect();
    let strides = spec.strides();
    let h = spec.spacing;
    let hd = h.powi(spec.dim as i32);
    let dim = spec.dim;
    let mut coords = vec![0usize; dim];
    let mut energy = 0.0;
    for idx in 0..f.len() {
        let mut g2 = 0.0;
        for k in 0..dim {
            let c = coords[k];
            let n = spec.shape[k];
            let d = if c == 0 {
                (f[idx + strides[k]] - f[idx]) / h
            } else if c == n - 1 {
                (f[idx] - f[idx - strides[k]]) / h
            } else {
                (f[idx + strides[k]] - f[idx - strides[k]]) / (2.0 * h)
            };
            g2 += d * d;
        }
        energy += g2 * hd;
        // advance odometer
        for k in (0..dim).rev() {
            coords[k] += 1;
            if coords[k] < spec.shape[k] {
                break;
            }
            coords[k] = 0;
        }
    }
    let rate = 0.5 * energy;
    if rate > cap {
        Ok(f64::INFINITY)
    } else {
        Ok(rate)
    }
}
