//! Atomic measures in R^d and the functionals evaluated on them.
//!
//! An [`AtomicMeasure`] is a weighted point cloud representing a finite
//! (usually sub-probability) measure: occupation measures of sampled paths,
//! empirical measures, quadrature discretizations of densities. All
//! downstream functionals (mollified densities, pairwise interaction
//! energies, concentration functions) are plain sums over the atoms,
//! accumulated in index order so results are bit-reproducible.

mod grid;
mod kernel;
mod mollifier;

pub use grid::{dv_rate, dv_rate_with_cap, mollify, GridDensity, GridSpec, DEFAULT_GRADIENT_CAP};
pub use kernel::{pairwise_energy, pairwise_energy_naive, Kernel, PreparedKernel, RadialTable};
pub use mollifier::{MollifierKind, MollifierSpec, PairKernel};

pub(crate) use kernel::CellIndex;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Accumulation tolerance for the cached total mass: `1e-12 * atom count`.
pub const MASS_ACCUM_TOL_PER_ATOM: f64 = 1e-12;

/// Slack allowed above 1 when a measure is used as a sub-probability.
pub const SUBPROB_TOL: f64 = 1e-9;

/// A nonnegative atomic measure `sum_i w_i * delta_{x_i}` in R^d.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomicMeasure {
    dim: usize,
    /// Flat row-major storage: atom i occupies `locations[i*dim .. (i+1)*dim]`.
    locations: Vec<f64>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl AtomicMeasure {
    /// Build a measure from atom locations and weights.
    ///
    /// Rejects empty input, dimension mismatches, negative weights and
    /// non-finite values.
    pub fn new(dim: usize, locations: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if locations.len() != weights.len() * dim {
            return Err(Error::DimMismatch {
                expected: weights.len() * dim,
                got: locations.len(),
            });
        }
        if locations.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("atom location"));
        }
        let mut total = 0.0;
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParameter(format!("invalid weight {w}")));
            }
            total += w;
        }
        Ok(Self {
            dim,
            locations,
            weights,
            total_mass: total,
        })
    }

    /// Single atom of given weight.
    pub fn dirac(location: &[f64], weight: f64) -> Result<Self> {
        Self::new(location.len(), location.to_vec(), vec![weight])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn location(&self, i: usize) -> &[f64] {
        &self.locations[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.locations
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    /// Check the cached mass against a fresh index-order sum.
    pub fn mass_consistent(&self) -> bool {
        let fresh: f64 = self.weights.iter().sum();
        (fresh - self.total_mass).abs() <= MASS_ACCUM_TOL_PER_ATOM * self.len() as f64
    }

    /// True when usable as a sub-probability measure.
    pub fn is_subprobability(&self) -> bool {
        self.total_mass <= 1.0 + SUBPROB_TOL
    }

    /// Translate every atom by `shift`.
    pub fn shifted(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: shift.len(),
            });
        }
        let mut locations = self.locations.clone();
        for chunk in locations.chunks_exact_mut(self.dim) {
            for (x, s) in chunk.iter_mut().zip(shift) {
                *x += s;
            }
        }
        Ok(Self {
            dim: self.dim,
            locations,
            weights: self.weights.clone(),
            total_mass: self.total_mass,
        })
    }

    /// Multiply every weight by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::InvalidParameter(format!("scale factor {factor}")));
        }
        Ok(Self {
            dim: self.dim,
            locations: self.locations.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
            total_mass: self.total_mass * factor,
        })
    }

    /// Keep the atoms selected by `keep`, in index order.
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        let mut locations = Vec::with_capacity(keep.len() * self.dim);
        let mut weights = Vec::with_capacity(keep.len());
        for &i in keep {
            locations.extend_from_slice(self.location(i));
            weights.push(self.weights[i]);
        }
        Self::new(self.dim, locations, weights)
    }

    /// Mass-weighted centroid.
    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for (x, w) in self.iter() {
            for (ci, xi) in c.iter_mut().zip(x) {
                *ci += w * xi;
            }
        }
        if self.total_mass > 0.0 {
            for ci in &mut c {
                *ci /= self.total_mass;
            }
        }
        c
    }

    /// Axis-aligned bounding box `(min, max)` over the atoms.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for (x, _) in self.iter() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(x[k]);
                hi[k] = hi[k].max(x[k]);
            }
        }
        (lo, hi)
    }

    /// Merge atoms into cells of side `h`; each output atom is the
    /// mass-weighted centroid of one occupied cell. Used to bound the cost of
    /// quadratic functionals on large sampled measures.
    pub fn coarsened(&self, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("coarsening cell {h}")));
        }
        use std::collections::HashMap;
        let mut cells: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut order: Vec<(Vec<f64>, f64)> = Vec::new();
        for (x, w) in self.iter() {
            let key: Vec<i64> = x.iter().map(|&xi| (xi / h).floor() as i64).collect();
            match cells.get(&key) {
                Some(&idx) => {
                    let (c, m) = &mut order[idx];
                    for (ci, xi) in c.iter_mut().zip(x) {
                        *ci += w * xi;
                    }
                    *m += w;
                }
                None => {
                    cells.insert(key, order.len());
                    order.push((x.iter().map(|&xi| w * xi).collect(), w));
                }
            }
        }
        let mut locations = Vec::with_capacity(order.len() * self.dim);
        let mut weights = Vec::with_capacity(order.len());
        for (c, m) in order {
            if m > 0.0 {
                locations.extend(c.iter().map(|ci| ci / m));
                weights.push(m);
            }
        }
        Self::new(self.dim, locations, weights)
    }

    /// Euclidean distance between atom `i` and a point.
    pub fn dist_to(&self, i: usize, point: &[f64]) -> f64 {
        self.location(i)
            .iter()
            .zip(point)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Write as CSV with header `x1,...,xd,weight`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        header.push("weight".into());
        wtr.write_record(&header)?;
        for (x, w) in self.iter() {
            let mut rec: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
            rec.push(format!("{w}"));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Read the CSV format produced by [`AtomicMeasure::write_csv`].
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 || header.iter().last() != Some("weight") {
            return Err(Error::InvalidParameter(
                "expected header x1,...,xd,weight".into(),
            ));
        }
        let dim = header.len() - 1;
        let mut locations = Vec::new();
        let mut weights = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() != dim + 1 {
                return Err(Error::InvalidParameter(format!(
                    "row has {} fields, expected {}",
                    record.len(),
                    dim + 1
                )));
            }
            for field in record.iter().take(dim) {
                locations.push(field.trim().parse::<f64>().map_err(|e| {
                    Error::InvalidParameter(format!("bad coordinate {field:?}: {e}"))
                })?);
            }
            let w = record.get(dim).unwrap();
            weights.push(
                w.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidParameter(format!("bad weight {w:?}: {e}")))?,
            );
        }
        Self::new(dim, locations, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_weight() {
        assert!(AtomicMeasure::new(1, vec![0.0, 1.0], vec![0.5, -0.1]).is_err());
    }

    #[test]
    fn rejects_empty() {
        assert!(matches!(
            AtomicMeasure::new(2, vec![], vec![]),
            Err(Error::EmptyMeasure)
        ));
    }

    #[test]
    fn mass_and_centroid() {
        let m = AtomicMeasure::new(2, vec![0.0, 0.0, 2.0, 0.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(m.total_mass(), 4.0);
        assert!(m.mass_consistent());
        assert_eq!(m.centroid(), vec![1.5, 0.0]);
    }

    #[test]
    fn csv_round_trip() {
        let m = AtomicMeasure::new(3, vec![0.5, -1.0, 2.0, 0.0, 0.25, 1e-3], vec![0.125, 0.875])
            .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = AtomicMeasure::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.dim(), 3);
        assert_eq!(back.len(), 2);
        for i in 0..2 {
            assert_eq!(back.location(i), m.location(i));
            assert_eq!(back.weight(i), m.weight(i));
        }
    }

    #[test]
    fn coarsen_preserves_mass() {
        let m = AtomicMeasure::new(
            1,
            vec![0.0, 0.01, 0.02, 5.0, 5.01],
            vec![0.2, 0.2, 0.2, 0.2, 0.2],
        )
        .unwrap();
        let c = m.coarsened(0.5).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_is_exact_on_dyadic_input() {
        let m = AtomicMeasure::new(1, vec![0.25, -3.5], vec![0.5, 0.5]).unwrap();
        let s = m.shifted(&[8.0]).unwrap();
        assert_eq!(s.location(0)[0], 8.25);
        assert_eq!(s.location(1)[0], 4.5);
    }
}
