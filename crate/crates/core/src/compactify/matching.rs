//! Pairing components of two decompositions into an orbit collection.

use super::{Decomposition, OrbitCollection, OrbitPair};
use crate::error::{Error, Result};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Pair each component of `da` with the unique component of `db` whose
/// center lies within `match_radius`, re-centering every matched pair modulo
/// its common shift. Unmatched components carry no mutual interaction and
/// are dropped.
///
/// Requires component separations within each decomposition to exceed
/// `2 * match_radius`, which makes matchings unambiguous.
pub fn match_pairs(
    da: &Decomposition,
    db: &Decomposition,
    match_radius: f64,
) -> Result<OrbitCollection> {
    if da.dim != db.dim {
        return Err(Error::DimMismatch {
            expected: da.dim,
            got: db.dim,
        });
    }
    if !(match_radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "match_radius {match_radius}"
        )));
    }
    for (name, dec) in [("left", da), ("right", db)] {
        for i in 0..dec.components.len() {
            for j in (i + 1)..dec.components.len() {
                let d = dist(&dec.components[i].center, &dec.components[j].center);
                if d <= 2.0 * match_radius {
                    return Err(Error::Separation(format!(
                        "{name} decomposition has centers {d:.6} apart, \
                         need > {} for match radius {match_radius}",
                        2.0 * match_radius
                    )));
                }
            }
        }
    }

    let mut used = vec![false; db.components.len()];
    let mut pairs = Vec::new();
    for a in &da.components {
        let mut candidates = db
            .components
            .iter()
            .enumerate()
            .filter(|(_, b)| dist(&a.center, &b.center) <= match_radius);
        let Some((j, b)) = candidates.next() else {
            continue;
        };
        if candidates.next().is_some() {
            return Err(Error::Separation(
                "ambiguous match: two candidate components within the match radius".into(),
            ));
        }
        if used[j] {
            return Err(Error::Separation(
                "component matched twice; separations violate the match radius".into(),
            ));
        }
        used[j] = true;
        let neg_a: Vec<f64> = a.center.iter().map(|c| -c).collect();
        let neg_b: Vec<f64> = b.center.iter().map(|c| -c).collect();
        let shift: Vec<f64> = b.center.iter().zip(&a.center).map(|(bc, ac)| bc - ac).collect();
        pairs.push(OrbitPair {
            alpha: a.atoms.shifted(&neg_a)?,
            beta: b.atoms.shifted(&neg_b)?,
            relative_shift: shift,
        });
    }
    OrbitCollection::new(da.dim, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compactify::{decompose, DecomposeParams};
    use crate::measures::AtomicMeasure;
    use rand_distr::{Distribution, Normal};

    fn cluster(rng: &mut impl rand::Rng, n: usize, mean: f64, sd: f64) -> Vec<f64> {
        let normal = Normal::new(mean, sd).unwrap();
        (0..n).map(|_| normal.sample(rng)).collect()
    }

    fn footnote_measures(n: f64, seed: u64, per: usize) -> (AtomicMeasure, AtomicMeasure) {
        let mut rng = crate::rng::fixture_stream(seed);
        let w = 1.0 / (3 * per) as f64;
        let mut mu = cluster(&mut rng, per, 0.0, 1.0);
        mu.extend(cluster(&mut rng, per, n, 1.0));
        mu.extend(cluster(&mut rng, per, 0.0, n));
        let mut nu = cluster(&mut rng, per, n * n, 1.0);
        nu.extend(cluster(&mut rng, per, n + 1.0, 1.0));
        nu.extend(cluster(&mut rng, per, 0.0, n));
        (
            AtomicMeasure::new(1, mu, vec![w; 3 * per]).unwrap(),
            AtomicMeasure::new(1, nu, vec![w; 3 * per]).unwrap(),
        )
    }

    #[test]
    fn footnote_sequences_match_to_a_single_pair() {
        let (mu, nu) = footnote_measures(50.0, 29, 10_000);
        let params = DecomposeParams::new(1.5, 0.05, 4.0).unwrap();
        let da = decompose(&mu, params).unwrap();
        let db = decompose(&nu, params).unwrap();
        let xi = match_pairs(&da, &db, 5.0).unwrap();
        assert_eq!(xi.pairs.len(), 1);
        let p = &xi.pairs[0];
        assert!((p.alpha.total_mass() - 1.0 / 3.0).abs() < 0.03);
        assert!((p.beta.total_mass() - 1.0 / 3.0).abs() < 0.03);
        assert!((p.relative_shift[0] - 1.0).abs() < 0.15, "shift {:?}", p.relative_shift);
    }

    #[test]
    fn identical_decompositions_self_match_with_zero_shift() {
        let mut rng = crate::rng::fixture_stream(31);
        let mut xs = cluster(&mut rng, 3000, 0.0, 0.5);
        xs.extend(cluster(&mut rng, 3000, 40.0, 0.5));
        let m = AtomicMeasure::new(1, xs, vec![1.0 / 6000.0; 6000]).unwrap();
        let d = decompose(&m, DecomposeParams::new(2.0, 0.05, 4.0).unwrap()).unwrap();
        let xi = match_pairs(&d, &d, 1.0).unwrap();
        assert_eq!(xi.pairs.len(), d.components.len());
        for p in &xi.pairs {
            assert_eq!(p.relative_shift[0], 0.0);
            assert_eq!(p.alpha.total_mass(), p.beta.total_mass());
        }
    }

    #[test]
    fn distant_decompositions_match_to_empty() {
        let mut rng = crate::rng::fixture_stream(37);
        let a = AtomicMeasure::new(1, cluster(&mut rng, 2000, 0.0, 0.5), vec![5e-4; 2000]).unwrap();
        let b =
            AtomicMeasure::new(1, cluster(&mut rng, 2000, 500.0, 0.5), vec![5e-4; 2000]).unwrap();
        let params = DecomposeParams::new(2.0, 0.05, 4.0).unwrap();
        let xi = match_pairs(
            &decompose(&a, params).unwrap(),
            &decompose(&b, params).unwrap(),
            5.0,
        )
        .unwrap();
        assert!(xi.is_empty());
    }

    #[test]
    fn close_centers_violate_separation() {
        let mut rng = crate::rng::fixture_stream(41);
        let mut xs = cluster(&mut rng, 2000, 0.0, 0.3);
        xs.extend(cluster(&mut rng, 2000, 10.0, 0.3));
        let m = AtomicMeasure::new(1, xs, vec![2.5e-4; 4000]).unwrap();
        let d = decompose(&m, DecomposeParams::new(1.0, 0.05, 4.0).unwrap()).unwrap();
        assert_eq!(d.components.len(), 2);
        // centers ~10 apart; 2 * 6 = 12 > 10 violates the precondition
        assert!(matches!(
            match_pairs(&d, &d, 6.0),
            Err(Error::Separation(_))
        ));
    }

    #[test]
    fn diagonal_shift_invariance_of_decompose_and_match() {
        // Dyadic data and shift keep the whole pipeline exact: re-centered
        // pairs and relative shifts are bit-identical.
        let mut rng = crate::rng::fixture_stream(43);
        let quantize = |v: f64| (v * 1048576.0).round() / 1048576.0;
        let mut xs: Vec<f64> = cluster(&mut rng, 2000, 0.0, 0.5);
        xs.extend(cluster(&mut rng, 2000, 30.0, 0.5));
        let xs: Vec<f64> = xs.into_iter().map(quantize).collect();
        let ys: Vec<f64> = xs.iter().map(|x| quantize(x + 0.5)).collect();
        let mu = AtomicMeasure::new(1, xs, vec![2.5e-4; 4000]).unwrap();
        let nu = AtomicMeasure::new(1, ys, vec![2.5e-4; 4000]).unwrap();
        let params = DecomposeParams::new(2.0, 0.05, 4.0).unwrap();
        let shift = [384.0];

        let xi = match_pairs(&decompose(&mu, params).unwrap(), &decompose(&nu, params).unwrap(), 3.0)
            .unwrap();
        let xi_shifted = match_pairs(
            &decompose(&mu.shifted(&shift).unwrap(), params).unwrap(),
            &decompose(&nu.shifted(&shift).unwrap(), params).unwrap(),
            3.0,
        )
        .unwrap();

        assert_eq!(xi.pairs.len(), xi_shifted.pairs.len());
        for (p, q) in xi.pairs.iter().zip(&xi_shifted.pairs) {
            assert_eq!(p.relative_shift, q.relative_shift);
            assert_eq!(p.alpha.total_mass(), q.alpha.total_mass());
            for i in 0..p.alpha.len() {
                assert_eq!(p.alpha.location(i), q.alpha.location(i));
            }
            for i in 0..p.beta.len() {
                assert_eq!(p.beta.location(i), q.beta.location(i));
            }
        }
    }
}
