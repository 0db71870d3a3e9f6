//! Scaling algebra, rate evaluation on factorized collections, and the
//! positive-definite product reduction.

use super::energy::{self, EnergyContext, RadialKernel};
use super::RadialProfile;
use crate::error::{Error, Result};
use crate::measures::MollifierSpec;
use serde::{Deserialize, Serialize};

/// Report of the mass-rescaling superadditivity check.
///
/// For a unit-mass profile with quartic term `A` and kinetic term `B`, the
/// mass-`m` dilation `psi_m(x) = m^2 psi(m x)` has energy
/// `E(m) = m^5 A - m^3 B`; whenever `E(m1 + m2) >= 0` the strict
/// superadditivity `E(m1 + m2) > E(m1) + E(m2)` follows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChiScalingReport {
    pub quartic: f64,
    pub kinetic: f64,
    pub m1: f64,
    pub m2: f64,
    pub e_m1: f64,
    pub e_m2: f64,
    pub e_combined: f64,
    pub superadditive: bool,
    /// Relative error of the grid-realized dilation energy against the
    /// algebraic value, per mass in `(m1, m2, m1+m2)`.
    pub grid_rel_errors: [f64; 3],
    pub grid_ok: bool,
}

/// Exact dilation energy.
pub fn dilation_energy(m: f64, quartic: f64, kinetic: f64) -> f64 {
    m.powi(5) * quartic - m.powi(3) * kinetic
}

/// Verify `E(m1 + m2) > E(m1) + E(m2)` on the dilation family of a
/// unit-mass profile, and that resampling the dilation on the grid
/// reproduces the algebra within 1%.
pub fn chi_scaling_check(psi: &RadialProfile, m1: f64, m2: f64) -> Result<ChiScalingReport> {
    if !(m1 > 0.0 && m2 > 0.0) {
        return Err(Error::InvalidParameter("masses must be positive".into()));
    }
    if (psi.mass() - 1.0).abs() > 1e-8 {
        return Err(Error::MassConstraint(format!(
            "chi_scaling_check expects a unit-mass profile, got {}",
            psi.mass()
        )));
    }
    let u = psi.values();
    let h = psi.h();
    let quartic = energy::quartic(u, h);
    let kinetic = energy::kinetic(u, h);
    let e_m1 = dilation_energy(m1, quartic, kinetic);
    let e_m2 = dilation_energy(m2, quartic, kinetic);
    let e_combined = dilation_energy(m1 + m2, quartic, kinetic);
    let superadditive = e_combined > e_m1 + e_m2;

    let mut grid_rel_errors = [0.0; 3];
    for (slot, m) in [m1, m2, m1 + m2].into_iter().enumerate() {
        let dilated = psi.dilated(m)?;
        let e_grid =
            energy::quartic(dilated.values(), h) - energy::kinetic(dilated.values(), h);
        let e_exact = dilation_energy(m, quartic, kinetic);
        grid_rel_errors[slot] = (e_grid - e_exact).abs() / e_exact.abs().max(1e-12);
    }
    let grid_ok = grid_rel_errors.iter().all(|&e| e <= 0.01);
    Ok(ChiScalingReport {
        quartic,
        kinetic,
        m1,
        m2,
        e_m1,
        e_m2,
        e_combined,
        superadditive,
        grid_rel_errors,
        grid_ok,
    })
}

/// Rate value of a factorized collection.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateValue {
    /// `1/2 sum_j (||grad psi_j||^2 + ||grad phi_j||^2)`.
    pub value: f64,
    /// For the mollified variant: the densities
    /// `(psi_j^2 * phi_eps)(r) (phi_j^2 * phi_eps)(r)` on the radial grid.
    pub mollified_products: Option<Vec<Vec<f64>>>,
}

fn check_collection_masses(pairs: &[(RadialProfile, RadialProfile)]) -> Result<()> {
    let tol = crate::measures::SUBPROB_TOL;
    let psi_mass: f64 = pairs.iter().map(|(a, _)| a.mass()).sum();
    let phi_mass: f64 = pairs.iter().map(|(_, b)| b.mass()).sum();
    if psi_mass > 1.0 + tol || phi_mass > 1.0 + tol {
        return Err(Error::MassConstraint(format!(
            "factorized collection masses ({psi_mass}, {phi_mass}) exceed 1"
        )));
    }
    Ok(())
}

/// Objective value of the given factorization: an upper bound for the
/// infimum defining the intersection-measure rate.
pub fn evaluate_rate(pairs: &[(RadialProfile, RadialProfile)]) -> Result<RateValue> {
    check_collection_masses(pairs)?;
    let mut value = 0.0;
    for (psi, phi) in pairs {
        value += 0.5
            * (energy::kinetic(psi.values(), psi.h()) + energy::kinetic(phi.values(), phi.h()));
    }
    Ok(RateValue {
        value,
        mollified_products: None,
    })
}

/// Rate value plus the mollified density products the collection induces.
pub fn evaluate_rate_mollified(
    pairs: &[(RadialProfile, RadialProfile)],
    spec: &MollifierSpec,
) -> Result<RateValue> {
    let mut base = evaluate_rate(pairs)?;
    let mut products = Vec::with_capacity(pairs.len());
    for (psi, phi) in pairs {
        if psi.h() != phi.h() || psi.n() != phi.n() {
            return Err(Error::InvalidParameter(
                "pair profiles must share a grid".into(),
            ));
        }
        let sq = |p: &RadialProfile| -> Vec<f64> { p.values().iter().map(|v| v * v).collect() };
        let a = radial_convolve_3d(&sq(psi), psi.h(), spec)?;
        let b = radial_convolve_3d(&sq(phi), phi.h(), spec)?;
        products.push(a.iter().zip(&b).map(|(x, y)| x * y).collect());
    }
    base.mollified_products = Some(products);
    Ok(base)
}

/// 3-d radial convolution of a radial density with a mollifier:
/// `(f * phi_eps)(rho) = (2 pi / rho) int r f(r) [G(rho + r) - G(|rho - r|)] dr`,
/// `G(s) = int_0^s u phi_eps(u) du`, evaluated on the density's grid.
pub fn radial_convolve_3d(density: &[f64], h: f64, spec: &MollifierSpec) -> Result<Vec<f64>> {
    let phi = spec.density(3)?;
    let rsup = phi.support_radius();
    let ng = 4096;
    let hg = rsup / ng as f64;
    let mut g = vec![0.0; ng + 1];
    for j in 1..=ng {
        let u0 = (j - 1) as f64 * hg;
        let u1 = j as f64 * hg;
        g[j] = g[j - 1] + 0.5 * hg * (u0 * phi.value_radial(u0) + u1 * phi.value_radial(u1));
    }
    let g_at = |s: f64| -> f64 {
        if s <= 0.0 {
            0.0
        } else if s >= rsup {
            g[ng]
        } else {
            let t = s / hg;
            let j = (t as usize).min(ng - 1);
            let frac = t - j as f64;
            g[j] * (1.0 - frac) + g[j + 1] * frac
        }
    };
    let f_at = |r: f64| -> f64 {
        let t = r / h;
        let i = t as usize;
        if i + 1 >= density.len() {
            return 0.0;
        }
        let frac = t - i as f64;
        density[i] * (1.0 - frac) + density[i + 1] * frac
    };
    let rmax = (density.len() - 1) as f64 * h;
    let nq = 2 * density.len().max(512);
    let hq = rmax / nq as f64;
    let mut out = Vec::with_capacity(density.len());
    for i in 0..density.len() {
        let rho = i as f64 * h;
        if rho == 0.0 {
            // (f * phi)(0) = 4 pi int f(r) phi(r) r^2 dr
            let mut s = 0.0;
            for j in 0..=nq {
                let r = j as f64 * hq;
                let w = if j == 0 || j == nq { 0.5 } else { 1.0 };
                s += w * f_at(r) * phi.value_radial(r) * r * r;
            }
            out.push(4.0 * std::f64::consts::PI * s * hq);
            continue;
        }
        let mut s = 0.0;
        for j in 0..=nq {
            let r = j as f64 * hq;
            let w = if j == 0 || j == nq { 0.5 } else { 1.0 };
            s += w * r * f_at(r) * (g_at(rho + r) - g_at((rho - r).abs()));
        }
        out.push(2.0 * std::f64::consts::PI / rho * s * hq);
    }
    Ok(out)
}

/// Both sides of the positive-definite reduction
/// `2 int int V psi^2 phi^2 <= int int V psi^2 psi^2 + int int V phi^2 phi^2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductReductionReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluate the reduction for a positive-definite kernel; `holds` allows
/// `1e-10` slack for accumulation error.
pub fn pekar_product_reduction_check(
    psi: &RadialProfile,
    phi: &RadialProfile,
    kernel: &RadialKernel,
) -> Result<ProductReductionReport> {
    if !(psi.mass() > 0.0) || !(phi.mass() > 0.0) {
        return Err(Error::ZeroDensity);
    }
    let ctx = EnergyContext::new(kernel, psi.h(), psi.n())?;
    if phi.h() != psi.h() || phi.n() != psi.n() {
        return Err(Error::InvalidParameter(
            "profiles must share a grid".into(),
        ));
    }
    let cross = ctx.interaction(psi.values(), phi.values());
    let self_psi = ctx.interaction(psi.values(), psi.values());
    let self_phi = ctx.interaction(phi.values(), phi.values());
    let lhs = 2.0 * cross;
    let rhs = self_psi + self_phi;
    Ok(ProductReductionReport {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-10 * rhs.abs().max(1.0),
    })
}
