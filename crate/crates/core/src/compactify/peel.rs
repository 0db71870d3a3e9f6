//! Concentration functions and greedy mass peeling.

use super::{Component, Decomposition};
use crate::error::{Error, Result};
use crate::measures::{AtomicMeasure, CellIndex};
use serde::{Deserialize, Serialize};

/// `Q(r) = max over candidate centers of the mass within distance r`,
/// candidate centers being the atom locations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationCurve {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

/// Peeling parameters: ball radius for the concentration search, the mass
/// floor below which peeling stops, and the peel-window factor (atoms within
/// `separation_factor * window_radius` of a chosen center join its
/// component).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DecomposeParams {
    pub window_radius: f64,
    pub mass_floor: f64,
    pub separation_factor: f64,
}

impl DecomposeParams {
    pub fn new(window_radius: f64, mass_floor: f64, separation_factor: f64) -> Result<Self> {
        if !(window_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window_radius {window_radius}"
            )));
        }
        if !(mass_floor > 0.0 && mass_floor < 1.0) {
            return Err(Error::InvalidParameter(format!("mass_floor {mass_floor}")));
        }
        if !(separation_factor >= 4.0) {
            return Err(Error::InvalidParameter(format!(
                "separation_factor {separation_factor} < 4"
            )));
        }
        Ok(Self {
            window_radius,
            mass_floor,
            separation_factor,
        })
    }

    pub fn peel_radius(&self) -> f64 {
        self.separation_factor * self.window_radius
    }
}

/// Default mass floor.
pub const DEFAULT_MASS_FLOOR: f64 = 0.05;
/// Default separation factor.
pub const DEFAULT_SEPARATION_FACTOR: f64 = 4.0;

/// Concentration function of `measure` at each radius in `radii`
/// (positive, strictly increasing).
pub fn concentration(measure: &AtomicMeasure, radii: &[f64]) -> Result<ConcentrationCurve> {
    if measure.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "radii must be positive and increasing".into(),
        ));
    }
    let all: Vec<usize> = (0..measure.len()).collect();
    let values = radii
        .iter()
        .map(|&r| best_center(measure, &all, r).1)
        .collect();
    Ok(ConcentrationCurve {
        radii: radii.to_vec(),
        values,
    })
}

/// Index and mass of the best ball center among `active` atoms: the atom
/// whose radius-`r` ball holds maximal active mass, lowest index on ties.
fn best_center(measure: &AtomicMeasure, active: &[usize], r: f64) -> (usize, f64) {
    let sub = measure
        .subset(active)
        .expect("active set is nonempty by construction");
    let cells = CellIndex::build(&sub, r);

    // Per-cell totals give an upper bound that prunes hopeless candidates.
    let mut best_idx = 0usize;
    let mut best_mass = f64::NEG_INFINITY;
    for i in 0..sub.len() {
        let x = sub.location(i);
        let mut bound = 0.0;
        cells.for_neighbors(x, |j| bound += sub.weight(j));
        if bound + 1e-12 < best_mass {
            continue;
        }
        let mut mass = 0.0;
        let r2 = r * r;
        cells.for_neighbors(x, |j| {
            let d2: f64 = sub
                .location(j)
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 <= r2 {
                mass += sub.weight(j);
            }
        });
        if mass > best_mass {
            best_mass = mass;
            best_idx = i;
        }
    }
    (active[best_idx], best_mass)
}

/// Greedy peeling: repeatedly find the radius-`window_radius` ball of
/// maximal mass; while that mass reaches `mass_floor`, remove everything
/// within the peel radius of its center as one component and recurse on the
/// remainder. What is left when the search drops below the floor is dust.
///
/// Components come back in decreasing mass order; centers of distinct
/// components are automatically farther apart than the peel radius.
pub fn decompose(measure: &AtomicMeasure, params: DecomposeParams) -> Result<Decomposition> {
    if measure.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let peel_r = params.peel_radius();
    let mut active: Vec<usize> = (0..measure.len()).collect();
    let mut components: Vec<Component> = Vec::new();

    while !active.is_empty() {
        let (center_idx, mass) = best_center(measure, &active, params.window_radius);
        if mass < params.mass_floor {
            break;
        }
        let center = measure.location(center_idx).to_vec();
        let mut taken = Vec::new();
        let mut kept = Vec::new();
        for &i in &active {
            if measure.dist_to(i, &center) <= peel_r {
                taken.push(i);
            } else {
                kept.push(i);
            }
        }
        let atoms = measure.subset(&taken)?;
        components.push(Component {
            center,
            mass: atoms.total_mass(),
            atoms,
        });
        active = kept;
    }

    let dust_mass: f64 = active.iter().map(|&i| measure.weight(i)).sum();
    components.sort_by(|a, b| b.mass.partial_cmp(&a.mass).unwrap());
    Ok(Decomposition {
        dim: measure.dim(),
        params,
        input_mass: measure.total_mass(),
        components,
        dust_mass,
    })
}
