//! Deterministic fixtures shared by tests, experiments and the CLI.
//!
//! The "escaping mixture" pair is the standing example for peeling and
//! matching: in one dimension,
//!
//! - `mu_n  = 1/3 N(0,1) + 1/3 N(n,1)   + 1/3 N(0,n^2)`
//! - `nu_n  = 1/3 N(n^2,1) + 1/3 N(n+1,1) + 1/3 N(0,n^2)`
//!
//! whose only matched pair in the limit is a unit-width Gaussian of mass 1/3
//! against another at relative shift 1; the wide bumps disperse into dust
//! and the remaining bumps drift apart.

use crate::compactify::{OrbitCollection, OrbitPair};
use crate::error::Result;
use crate::measures::AtomicMeasure;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// One mixture component: `mass * N(mean, sd^2)`.
#[derive(Clone, Copy, Debug)]
pub struct MixtureComponent {
    pub mean: f64,
    pub sd: f64,
    pub mass: f64,
}

/// Sample a 1-d mixture into equally weighted atoms.
pub fn sample_mixture(
    components: &[MixtureComponent],
    n_atoms: usize,
    seed: u64,
) -> Result<AtomicMeasure> {
    let mut rng = crate::rng::fixture_stream(seed);
    let total: f64 = components.iter().map(|c| c.mass).sum();
    let mut locations = Vec::with_capacity(n_atoms);
    for _ in 0..n_atoms {
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = components[components.len() - 1];
        for c in components {
            if pick < c.mass {
                chosen = *c;
                break;
            }
            pick -= c.mass;
        }
        let normal = Normal::new(chosen.mean, chosen.sd).expect("valid mixture component");
        locations.push(normal.sample(&mut rng));
    }
    AtomicMeasure::new(1, locations, vec![total / n_atoms as f64; n_atoms])
}

/// Deterministic quadrature discretization of a 1-d mixture: atoms on a
/// `spacing * sd` grid spanning `span` standard deviations per component,
/// weights proportional to the density and normalized to the component
/// mass.
pub fn quadrature_mixture(
    components: &[MixtureComponent],
    spacing: f64,
    span: f64,
) -> Result<AtomicMeasure> {
    let mut locations = Vec::new();
    let mut weights = Vec::new();
    for c in components {
        let h = spacing * c.sd;
        let half = (span * c.sd / h).ceil() as i64;
        let mut raw = Vec::with_capacity((2 * half + 1) as usize);
        for i in -half..=half {
            let x = c.mean + i as f64 * h;
            let z = (x - c.mean) / c.sd;
            raw.push((x, (-0.5 * z * z).exp()));
        }
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        for (x, w) in raw {
            locations.push(x);
            weights.push(c.mass * w / total);
        }
    }
    AtomicMeasure::new(1, locations, weights)
}

fn mixture_pair(n: f64) -> ([MixtureComponent; 3], [MixtureComponent; 3]) {
    let third = 1.0 / 3.0;
    let mu = [
        MixtureComponent { mean: 0.0, sd: 1.0, mass: third },
        MixtureComponent { mean: n, sd: 1.0, mass: third },
        MixtureComponent { mean: 0.0, sd: n, mass: third },
    ];
    let nu = [
        MixtureComponent { mean: n * n, sd: 1.0, mass: third },
        MixtureComponent { mean: n + 1.0, sd: 1.0, mass: third },
        MixtureComponent { mean: 0.0, sd: n, mass: third },
    ];
    (mu, nu)
}

/// Sampled escaping-mixture pair at parameter `n`.
pub fn escaping_mixture_sampled(
    n: f64,
    atoms_per_measure: usize,
    seed: u64,
) -> Result<(AtomicMeasure, AtomicMeasure)> {
    let (mu, nu) = mixture_pair(n);
    Ok((
        sample_mixture(&mu, atoms_per_measure, seed)?,
        sample_mixture(&nu, atoms_per_measure, seed.wrapping_add(1))?,
    ))
}

/// Deterministic quadrature version of the escaping-mixture pair.
pub fn escaping_mixture_quadrature(
    n: f64,
    spacing: f64,
) -> Result<(AtomicMeasure, AtomicMeasure)> {
    let (mu, nu) = mixture_pair(n);
    Ok((
        quadrature_mixture(&mu, spacing, 8.5)?,
        quadrature_mixture(&nu, spacing, 8.5)?,
    ))
}

/// The limiting matched pair of the escaping mixture: two unit Gaussians of
/// mass 1/3 at relative shift 1, discretized at `spacing`.
pub fn escaping_mixture_limit(spacing: f64) -> Result<OrbitCollection> {
    let third = MixtureComponent {
        mean: 0.0,
        sd: 1.0,
        mass: 1.0 / 3.0,
    };
    let alpha = quadrature_mixture(&[third], spacing, 8.5)?;
    let beta = alpha.clone();
    OrbitCollection::new(
        1,
        vec![OrbitPair {
            alpha,
            beta,
            relative_shift: vec![1.0],
        }],
    )
}

/// Small random orbit collection for metric property tests: up to
/// `max_pairs` pairs, a handful of atoms per side, total masses below one.
pub fn random_orbit_collection(
    rng: &mut impl Rng,
    dim: usize,
    max_pairs: usize,
) -> OrbitCollection {
    let n_pairs = rng.gen_range(0..=max_pairs);
    let mut raw: Vec<(AtomicMeasure, AtomicMeasure, Vec<f64>)> = Vec::new();
    for _ in 0..n_pairs {
        let atoms = |rng: &mut dyn rand::RngCore| -> AtomicMeasure {
            let count = 1 + (rng.next_u32() as usize % 5);
            let mut locations = Vec::with_capacity(count * dim);
            let mut weights = Vec::with_capacity(count);
            for _ in 0..count {
                for _ in 0..dim {
                    locations.push((rng.next_u32() as f64 / u32::MAX as f64) * 6.0 - 3.0);
                }
                weights.push(0.1 + 0.9 * (rng.next_u32() as f64 / u32::MAX as f64));
            }
            AtomicMeasure::new(dim, locations, weights).expect("valid random atoms")
        };
        let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 8.0 - 4.0).collect();
        raw.push((atoms(rng), atoms(rng), shift));
    }
    // scale both sides to random totals at most one
    let alpha_total: f64 = raw.iter().map(|(a, _, _)| a.total_mass()).sum();
    let beta_total: f64 = raw.iter().map(|(_, b, _)| b.total_mass()).sum();
    let alpha_target = 0.2 + 0.8 * rng.gen::<f64>();
    let beta_target = 0.2 + 0.8 * rng.gen::<f64>();
    let pairs = raw
        .into_iter()
        .map(|(a, b, shift)| OrbitPair {
            alpha: a.scaled(alpha_target / alpha_total.max(1e-12)).unwrap(),
            beta: b.scaled(beta_target / beta_total.max(1e-12)).unwrap(),
            relative_shift: shift,
        })
        .collect();
    OrbitCollection::new(dim, pairs).expect("masses scaled below one")
}
