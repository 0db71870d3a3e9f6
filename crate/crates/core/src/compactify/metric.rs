//! Test functions, the pair functionals, and the metric on orbit
//! collections.
//!
//! A level-1 test function is `f(x, y) = g_s(x - y)` and a level-2 one is
//! `f(x1, y1, x2, y2) = g_s(x1 - y1) g_s(x1 - x2) g_s(y1 - y2)`, with
//! `g_s(v) = exp(-|v|^2 / (2 s^2))`. Both depend only on differences, so
//! they are diagonally translation-invariant and vanish as the diameter of
//! the argument cloud grows. Scales are drawn from a geometric ladder.
//!
//! `Lambda(f, xi) = sum over pairs of the k-fold product integral of f
//! against alpha (x) beta`, and the metric is the weighted l^1 distance of
//! the `Lambda` sequences with weights `2^-r / (1 + ||f_r||_inf)`
//! (`||f_r||_inf = 1` here).

use super::OrbitCollection;
use crate::error::{Error, Result};
use crate::measures::{pairwise_energy, PreparedKernel};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    One,
    Two,
}

/// One member of the test family: a product Gaussian in the difference
/// coordinates at a fixed scale.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TestFunction {
    pub level: Level,
    pub scale: f64,
}

/// Base geometric ladder of scales.
pub const SCALE_LADDER: [f64; 6] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

/// Ordered family: members alternate level 1 and level 2 through the scale
/// ladder, extending the ladder geometrically when more members are asked
/// for.
#[derive(Clone, Debug)]
pub struct TestFunctionFamily {
    members: Vec<TestFunction>,
}

/// Minimum family size accepted by [`metric_d`].
pub const MIN_FAMILY: usize = 16;

impl TestFunctionFamily {
    pub fn standard(count: usize) -> Self {
        let mut members = Vec::with_capacity(count);
        for r in 0..count {
            let tier = r / 2;
            let scale = if tier < SCALE_LADDER.len() {
                SCALE_LADDER[tier]
            } else {
                SCALE_LADDER[SCALE_LADDER.len() - 1]
                    * 2f64.powi((tier - SCALE_LADDER.len() + 1) as i32)
            };
            let level = if r % 2 == 0 { Level::One } else { Level::Two };
            members.push(TestFunction { level, scale });
        }
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[TestFunction] {
        &self.members
    }

    /// Weight of member `r` (0-based): `2^-(r+1) / (1 + ||f||_inf)` with
    /// `||f||_inf = 1`.
    pub fn weight(&self, r: usize) -> f64 {
        0.5 * 2f64.powi(-(r as i32 + 1))
    }
}

impl Default for TestFunctionFamily {
    fn default() -> Self {
        Self::standard(MIN_FAMILY)
    }
}

#[inline]
fn gauss(d2: f64, inv_2s2: f64) -> f64 {
    (-d2 * inv_2s2).exp()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dist2_shifted(a: &[f64], b: &[f64], shift: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(shift)
        .map(|((x, y), s)| {
            let d = x - (y + s);
            d * d
        })
        .sum()
}

/// Terms whose Gaussian factor falls below exp(-36) are dropped.
const PRUNE_FACTOR: f64 = 8.5;

/// `Lambda(f, xi)`: sum over matched pairs of the level-k product integral
/// of `f` against `alpha (x) beta`. Atom sums run in index order; level-2
/// sums prune quadruples once a Gaussian factor is negligible.
pub fn lambda_functional(f: &TestFunction, xi: &OrbitCollection) -> f64 {
    let s2 = f.scale * f.scale;
    let inv_2s2 = 0.5 / s2;
    let prune2 = PRUNE_FACTOR * PRUNE_FACTOR * s2;
    let mut total = 0.0;
    for pair in &xi.pairs {
        let alpha = &pair.alpha;
        let beta = &pair.beta;
        let shift = &pair.relative_shift;
        match f.level {
            Level::One => {
                for (x, wx) in alpha.iter() {
                    let mut row = 0.0;
                    for (y, wy) in beta.iter() {
                        let d2 = dist2_shifted(x, y, shift);
                        if d2 <= prune2 {
                            row += wy * gauss(d2, inv_2s2);
                        }
                    }
                    total += wx * row;
                }
            }
            Level::Two => {
                // f = g(x1-y1) g(x1-x2) g(y1-y2); the relative shift cancels
                // in y1-y2.
                for (x1, wx1) in alpha.iter() {
                    for (y1, wy1) in beta.iter() {
                        let d2 = dist2_shifted(x1, y1, shift);
                        if d2 > prune2 {
                            continue;
                        }
                        let g1 = gauss(d2, inv_2s2);
                        let mut sum_a2 = 0.0;
                        for (x2, wx2) in alpha.iter() {
                            let d2a = dist2(x1, x2);
                            if d2a <= prune2 {
                                sum_a2 += wx2 * gauss(d2a, inv_2s2);
                            }
                        }
                        let mut sum_b2 = 0.0;
                        for (y2, wy2) in beta.iter() {
                            let d2b = dist2(y1, y2);
                            if d2b <= prune2 {
                                sum_b2 += wy2 * gauss(d2b, inv_2s2);
                            }
                        }
                        total += wx1 * wy1 * g1 * sum_a2 * sum_b2;
                    }
                }
            }
        }
    }
    total
}

/// Truncated metric value plus the tail bound of the dropped members.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Weighted l^1 distance of the `Lambda` sequences over the family.
///
/// Requires at least [`MIN_FAMILY`] members; the reported tail bound is
/// `2 * 2^-R` for a family of `R` members.
pub fn metric_d(
    xi1: &OrbitCollection,
    xi2: &OrbitCollection,
    family: &TestFunctionFamily,
) -> Result<MetricValue> {
    if family.len() < MIN_FAMILY {
        return Err(Error::InvalidParameter(format!(
            "family truncation {} < {MIN_FAMILY}",
            family.len()
        )));
    }
    let mut value = 0.0;
    for (r, f) in family.members().iter().enumerate() {
        let l1 = lambda_functional(f, xi1);
        let l2 = lambda_functional(f, xi2);
        value += family.weight(r) * (l1 - l2).abs();
    }
    Ok(MetricValue {
        value,
        tail_bound: 2.0 * 2f64.powi(-(family.len() as i32)),
    })
}

/// `H(xi) = sum over pairs of the mutual energy of alpha and beta at their
/// relative shift`.
pub fn h_energy(xi: &OrbitCollection, kernel: &PreparedKernel) -> Result<f64> {
    let mut total = 0.0;
    for pair in &xi.pairs {
        let beta = pair.beta.shifted(&pair.relative_shift)?;
        total += pairwise_energy(&pair.alpha, &beta, kernel)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compactify::OrbitPair;
    use crate::measures::{AtomicMeasure, Kernel};

    fn single_pair(xa: f64, wa: f64, xb: f64, wb: f64, shift: f64) -> OrbitCollection {
        OrbitCollection::new(
            1,
            vec![OrbitPair {
                alpha: AtomicMeasure::dirac(&[xa], wa).unwrap(),
                beta: AtomicMeasure::dirac(&[xb], wb).unwrap(),
                relative_shift: vec![shift],
            }],
        )
        .unwrap()
    }

    #[test]
    fn lambda_on_empty_collection_is_zero() {
        let xi = OrbitCollection::empty(3);
        for f in TestFunctionFamily::default().members() {
            assert_eq!(lambda_functional(f, &xi), 0.0);
        }
    }

    #[test]
    fn lambda_single_atom_arithmetic() {
        // alpha = (1/3) delta_0, beta = (1/3) delta_e1:
        // Lambda(g_1) = (1/9) exp(-1/2).
        let xi = single_pair(0.0, 1.0 / 3.0, 1.0, 1.0 / 3.0, 0.0);
        let f = TestFunction {
            level: Level::One,
            scale: 1.0,
        };
        let expected = (1.0 / 9.0) * (-0.5f64).exp();
        assert!((lambda_functional(&f, &xi) - expected).abs() < 1e-15);
    }

    #[test]
    fn lambda_is_additive_over_pairs_and_multilinear_in_masses() {
        let a = single_pair(0.0, 0.2, 0.5, 0.3, 1.0);
        let b = single_pair(0.25, 0.4, -0.5, 0.1, -2.0);
        let mut both_pairs = a.pairs.clone();
        both_pairs.extend(b.pairs.clone());
        let both = OrbitCollection::new(1, both_pairs).unwrap();
        for f in TestFunctionFamily::default().members() {
            let la = lambda_functional(f, &a);
            let lb = lambda_functional(f, &b);
            let lab = lambda_functional(f, &both);
            assert!((lab - (la + lb)).abs() <= 1e-15 * lab.abs().max(1.0));
        }
        // scaling the alpha weights of a pair scales its level-k summand by c^k
        let c = 0.5;
        let scaled = OrbitCollection::new(
            1,
            vec![OrbitPair {
                alpha: a.pairs[0].alpha.scaled(c).unwrap(),
                beta: a.pairs[0].beta.clone(),
                relative_shift: a.pairs[0].relative_shift.clone(),
            }],
        )
        .unwrap();
        let f1 = TestFunction {
            level: Level::One,
            scale: 1.0,
        };
        let f2 = TestFunction {
            level: Level::Two,
            scale: 1.0,
        };
        assert!(
            (lambda_functional(&f1, &scaled) - c * lambda_functional(&f1, &a)).abs() < 1e-15
        );
        assert!(
            (lambda_functional(&f2, &scaled) - c * c * lambda_functional(&f2, &a)).abs() < 1e-15
        );
    }

    #[test]
    fn metric_identity_and_symmetry_are_exact() {
        let family = TestFunctionFamily::default();
        let a = single_pair(0.0, 0.3, 0.0, 0.3, 1.5);
        let b = single_pair(0.1, 0.2, -0.2, 0.4, -0.5);
        assert_eq!(metric_d(&a, &a, &family).unwrap().value, 0.0);
        let ab = metric_d(&a, &b, &family).unwrap().value;
        let ba = metric_d(&b, &a, &family).unwrap().value;
        assert_eq!(ab, ba);
        assert!(ab > 0.0);
    }

    #[test]
    fn metric_requires_sixteen_members() {
        let small = TestFunctionFamily::standard(8);
        let a = OrbitCollection::empty(1);
        assert!(metric_d(&a, &a, &small).is_err());
    }

    #[test]
    fn tail_bound_matches_truncation() {
        let family = TestFunctionFamily::standard(20);
        let a = OrbitCollection::empty(2);
        let m = metric_d(&a, &a, &family).unwrap();
        assert_eq!(m.tail_bound, 2.0 * 2f64.powi(-20));
    }

    #[test]
    fn h_energy_empty_and_single_pair() {
        let kernel = Kernel::RegularizedCoulomb { delta: 1.0 }.prepare(1).unwrap();
        assert_eq!(h_energy(&OrbitCollection::empty(1), &kernel).unwrap(), 0.0);
        // unit point masses at relative shift z: H = V(z)
        let z = 2.0;
        let xi = single_pair(0.0, 1.0, 0.0, 1.0, z);
        let h = h_energy(&xi, &kernel).unwrap();
        assert!((h - 1.0 / (1.0 + z * z).sqrt()).abs() < 1e-15);
    }
}
