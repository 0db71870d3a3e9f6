//! Mollifier kernels and their self-convolutions.
//!
//! Two families are provided: a renormalized truncated Gaussian
//! `phi_eps(x) = c * exp(-|x|^2 / (2 eps^2))` on the ball of radius
//! `truncation * eps` (default truncation 6), and the classical smooth bump
//! `c * exp(-1 / (1 - |x/eps|^2))` supported exactly on the eps-ball. Both
//! integrate to 1; the normalizing constants depend on the ambient
//! dimension, so evaluation is always relative to an explicit `dim`.
//!
//! The pair kernel `V_eps = phi_eps * phi_eps` (convolution) is what mutual
//! interaction energies are built from: for the Gaussian kind it is again a
//! truncated Gaussian of width `sqrt(2) eps` in closed form, for the bump
//! kind it is tabulated by numerical radial convolution.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MollifierKind {
    GaussianTruncated,
    Bump,
}

/// Width and truncation of a mollifier family member.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub kind: MollifierKind,
    /// Width parameter eps.
    pub epsilon: f64,
    /// Support radius expressed as a multiple of eps. Fixed to 1 for bumps.
    pub truncation_radius: f64,
}

/// Default truncation for the Gaussian kind, in units of eps.
pub const DEFAULT_GAUSSIAN_TRUNCATION: f64 = 6.0;

impl MollifierSpec {
    pub fn gaussian(epsilon: f64) -> Result<Self> {
        Self::new(
            MollifierKind::GaussianTruncated,
            epsilon,
            DEFAULT_GAUSSIAN_TRUNCATION,
        )
    }

    pub fn bump(epsilon: f64) -> Result<Self> {
        Self::new(MollifierKind::Bump, epsilon, 1.0)
    }

    pub fn new(kind: MollifierKind, epsilon: f64, truncation_radius: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon}")));
        }
        if !(truncation_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation_radius {truncation_radius}"
            )));
        }
        if kind == MollifierKind::Bump && (truncation_radius - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "bump mollifier support is exactly the eps-ball".into(),
            ));
        }
        Ok(Self {
            kind,
            epsilon,
            truncation_radius,
        })
    }

    /// Radius of the support ball of phi_eps.
    pub fn support_radius(&self) -> f64 {
        self.truncation_radius * self.epsilon
    }

    /// Evaluator for phi_eps in `dim` dimensions.
    pub fn density(&self, dim: usize) -> Result<MollifierEval> {
        MollifierEval::new(*self, dim)
    }

    /// Evaluator for the pair kernel `V_eps = phi_eps * phi_eps` in `dim`
    /// dimensions. Support radius is `2 * support_radius()`.
    pub fn pair_kernel(&self, dim: usize) -> Result<PairKernel> {
        PairKernel::new(*self, dim)
    }
}

/// Surface area of the unit sphere S^{d-1}.
pub(crate) fn sphere_area(dim: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(dim as f64 / 2.0) / gamma(dim as f64 / 2.0)
}

/// Prepared pointwise evaluator for phi_eps.
#[derive(Clone, Debug)]
pub struct MollifierEval {
    spec: MollifierSpec,
    dim: usize,
    norm: f64,
    support: f64,
}

impl MollifierEval {
    fn new(spec: MollifierSpec, dim: usize) -> Result<Self> {
        if dim == 0 || dim > 8 {
            return Err(Error::InvalidParameter(format!("dim {dim}")));
        }
        let support = spec.support_radius();
        let norm = match spec.kind {
            MollifierKind::GaussianTruncated => {
                gaussian_truncated_norm(dim, spec.epsilon, spec.truncation_radius)
            }
            MollifierKind::Bump => {
                let unit = radial_integral(dim, 1.0, 4096, |r| {
                    if r < 1.0 {
                        (-1.0 / (1.0 - r * r)).exp()
                    } else {
                        0.0
                    }
                });
                1.0 / (unit * spec.epsilon.powi(dim as i32))
            }
        };
        Ok(Self {
            spec,
            dim,
            norm,
            support,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_radius(&self) -> f64 {
        self.support
    }

    /// phi_eps at radius `r >= 0`.
    pub fn value_radial(&self, r: f64) -> f64 {
        if r >= self.support {
            return 0.0;
        }
        match self.spec.kind {
            MollifierKind::GaussianTruncated => {
                let e = self.spec.epsilon;
                self.norm * (-r * r / (2.0 * e * e)).exp()
            }
            MollifierKind::Bump => {
                let u = r / self.spec.epsilon;
                self.norm * (-1.0 / (1.0 - u * u)).exp()
            }
        }
    }

    /// phi_eps at a displacement vector.
    pub fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.value_radial(r2.sqrt())
    }
}

/// Normalization for the truncated Gaussian: the truncated integral equals
/// `(2 pi eps^2)^{d/2} * P(chi_d <= truncation)`, with the chi tail written
/// through the regularized lower incomplete gamma function.
fn gaussian_truncated_norm(dim: usize, epsilon: f64, truncation: f64) -> f64 {
    let d = dim as f64;
    let full = (2.0 * std::f64::consts::PI * epsilon * epsilon).powf(d / 2.0);
    let inside = gamma_lr(d / 2.0, truncation * truncation / 2.0);
    1.0 / (full * inside)
}

/// `int_{R^d} f(|x|) dx` truncated at radius `rmax`, by the composite
/// trapezoid rule on `[0, rmax]` with `n` panels.
pub(crate) fn radial_integral(dim: usize, rmax: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let area = sphere_area(dim);
    let h = rmax / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let r = i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += w * f(r) * r.powi(dim as i32 - 1);
    }
    area * sum * h
}

/// The self-convolution kernel `V_eps = phi_eps * phi_eps`.
///
/// Nonnegative, even, integrates to 1, supported in the ball of radius
/// `2 * truncation * eps`.
#[derive(Clone, Debug)]
pub struct PairKernel {
    support: f64,
    form: PairKernelForm,
}

#[derive(Clone, Debug)]
enum PairKernelForm {
    /// `c * exp(-r^2 / (4 eps^2))`, renormalized on the truncated support.
    Gaussian { norm: f64, inv_4eps2: f64 },
    /// Linear interpolation of a numeric convolution table.
    Table { table: super::RadialTable },
}

impl PairKernel {
    fn new(spec: MollifierSpec, dim: usize) -> Result<Self> {
        let support = 2.0 * spec.support_radius();
        match spec.kind {
            MollifierKind::GaussianTruncated => {
                // phi*phi of untruncated Gaussians is Gaussian with doubled
                // variance; renormalizing on the doubled support absorbs the
                // O(1e-8) truncation defect.
                let eff = MollifierSpec::new(
                    MollifierKind::GaussianTruncated,
                    std::f64::consts::SQRT_2 * spec.epsilon,
                    std::f64::consts::SQRT_2 * spec.truncation_radius,
                )?;
                let eval = eff.density(dim)?;
                Ok(Self {
                    support,
                    form: PairKernelForm::Gaussian {
                        norm: eval.norm,
                        inv_4eps2: 1.0 / (4.0 * spec.epsilon * spec.epsilon),
                    },
                })
            }
            MollifierKind::Bump => {
                let phi = spec.density(dim)?;
                let table = convolve_radial(dim, &phi, 2048)?;
                Ok(Self {
                    support,
                    form: PairKernelForm::Table { table },
                })
            }
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.support
    }

    pub fn value_radial(&self, r: f64) -> f64 {
        if r >= self.support {
            return 0.0;
        }
        match &self.form {
            PairKernelForm::Gaussian { norm, inv_4eps2 } => norm * (-r * r * inv_4eps2).exp(),
            PairKernelForm::Table { table } => table.value_radial(r),
        }
    }

    pub fn value_r2(&self, r2: f64) -> f64 {
        if r2 >= self.support * self.support {
            return 0.0;
        }
        match &self.form {
            PairKernelForm::Gaussian { norm, inv_4eps2 } => norm * (-r2 * inv_4eps2).exp(),
            PairKernelForm::Table { table } => table.value_radial(r2.sqrt()),
        }
    }
}

/// Numeric radial self-convolution `(f * f)(rho)` tabulated on
/// `[0, 2 * support]`. Supports dims 1..=3.
fn convolve_radial(dim: usize, f: &MollifierEval, samples: usize) -> Result<super::RadialTable> {
    let rsup = f.support_radius();
    let out_max = 2.0 * rsup;
    let n_quad = 1024;
    let mut values = Vec::with_capacity(samples + 1);
    let step = out_max / samples as f64;
    match dim {
        1 => {
            for i in 0..=samples {
                let rho = i as f64 * step;
                // int f(|y|) f(|rho - y|) dy over y in [rho - rsup, rsup]
                let a = rho - rsup;
                let b = rsup;
                let v = if a >= b {
                    0.0
                } else {
                    let h = (b - a) / n_quad as f64;
                    let mut s = 0.0;
                    for j in 0..=n_quad {
                        let y = a + j as f64 * h;
                        let w = if j == 0 || j == n_quad { 0.5 } else { 1.0 };
                        s += w * f.value_radial(y.abs()) * f.value_radial((rho - y).abs());
                    }
                    s * h
                };
                values.push(v);
            }
        }
        2 => {
            for i in 0..=samples {
                let rho = i as f64 * step;
                let hr = rsup / n_quad as f64;
                let n_theta = 256;
                let ht = std::f64::consts::PI / n_theta as f64;
                let mut s = 0.0;
                for j in 0..=n_quad {
                    let r = j as f64 * hr;
                    let wr = if j == 0 || j == n_quad { 0.5 } else { 1.0 };
                    let mut st = 0.0;
                    for k in 0..=n_theta {
                        let th = k as f64 * ht;
                        let wt = if k == 0 || k == n_theta { 0.5 } else { 1.0 };
                        let d2 = rho * rho + r * r - 2.0 * rho * r * th.cos();
                        st += wt * f.value_radial(d2.max(0.0).sqrt());
                    }
                    // symmetric in theta: integrate over [0, pi] and double
                    s += wr * f.value_radial(r) * r * 2.0 * st * ht;
                }
                values.push(s * hr);
            }
        }
        3 => {
            // Precompute G(s) = int_0^s u f(u) du on a fine grid.
            let ng = 4096;
            let hg = rsup / ng as f64;
            let mut g = vec![0.0; ng + 1];
            for j in 1..=ng {
                let u0 = (j - 1) as f64 * hg;
                let u1 = j as f64 * hg;
                g[j] = g[j - 1]
                    + 0.5 * hg * (u0 * f.value_radial(u0) + u1 * f.value_radial(u1));
            }
            let g_at = |s: f64| -> f64 {
                if s <= 0.0 {
                    return 0.0;
                }
                if s >= rsup {
                    return g[ng];
                }
                let t = s / hg;
                let j = (t as usize).min(ng - 1);
                let frac = t - j as f64;
                g[j] * (1.0 - frac) + g[j + 1] * frac
            };
            for i in 0..=samples {
                let rho = i as f64 * step;
                if rho == 0.0 {
                    // V(0) = int f^2 = 4 pi int f(r)^2 r^2 dr
                    values.push(radial_integral(3, rsup, n_quad, |r| {
                        let v = f.value_radial(r);
                        v * v
                    }));
                    continue;
                }
                let hr = rsup / n_quad as f64;
                let mut s = 0.0;
                for j in 0..=n_quad {
                    let r = j as f64 * hr;
                    let wj = if j == 0 || j == n_quad { 0.5 } else { 1.0 };
                    let inner = g_at(rho + r) - g_at((rho - r).abs());
                    s += wj * r * f.value_radial(r) * inner;
                }
                values.push(2.0 * std::f64::consts::PI / rho * s * hr);
            }
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "bump pair kernel supports dims 1..=3, got {dim}"
            )))
        }
    }
    // Kill quadrature drift in the total mass so that int V = 1 holds as
    // sharply as for the closed-form kind.
    let table = super::RadialTable::new(step, values)?;
    let mass = radial_integral(dim, out_max, 8192, |r| table.value_radial(r));
    super::RadialTable::new(
        step,
        table.values().iter().map(|v| v / mass).collect::<Vec<_>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mass(eval: &MollifierEval) -> f64 {
        radial_integral(eval.dim(), eval.support_radius(), 20000, |r| {
            eval.value_radial(r)
        })
    }

    #[test]
    fn gaussian_integrates_to_one() {
        for dim in [1usize, 2, 3] {
            let spec = MollifierSpec::gaussian(0.5).unwrap();
            let eval = spec.density(dim).unwrap();
            assert!(
                (mass(&eval) - 1.0).abs() < 1e-8,
                "dim {dim}: mass {}",
                mass(&eval)
            );
        }
    }

    #[test]
    fn bump_integrates_to_one() {
        for dim in [1usize, 3] {
            let spec = MollifierSpec::bump(0.7).unwrap();
            let eval = spec.density(dim).unwrap();
            assert!((mass(&eval) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn support_is_respected() {
        let spec = MollifierSpec::gaussian(0.5).unwrap();
        let eval = spec.density(3).unwrap();
        assert_eq!(eval.value_radial(3.0), 0.0);
        assert!(eval.value_radial(2.99) >= 0.0);
        let bump = MollifierSpec::bump(0.5).unwrap().density(3).unwrap();
        assert_eq!(bump.value_radial(0.5), 0.0);
        assert!(bump.value_radial(0.49) > 0.0);
    }

    #[test]
    fn pair_kernel_integrates_to_one() {
        for dim in [1usize, 3] {
            let spec = MollifierSpec::gaussian(0.5).unwrap();
            let v = spec.pair_kernel(dim).unwrap();
            let m = radial_integral(dim, v.support_radius(), 20000, |r| v.value_radial(r));
            assert!((m - 1.0).abs() < 1e-7, "dim {dim}: mass {m}");
        }
        let spec = MollifierSpec::bump(0.5).unwrap();
        let v = spec.pair_kernel(3).unwrap();
        let m = radial_integral(3, v.support_radius(), 20000, |r| v.value_radial(r));
        assert!((m - 1.0).abs() < 1e-6, "bump mass {m}");
    }

    #[test]
    fn gaussian_pair_kernel_matches_numeric_convolution() {
        // V_eps(z) = int phi(y) phi(y - z) dy, checked at a few radii.
        let spec = MollifierSpec::gaussian(1.0).unwrap();
        let dim = 3;
        let phi = spec.density(dim).unwrap();
        let v = spec.pair_kernel(dim).unwrap();
        for &rho in &[0.0, 0.5, 1.0, 2.0] {
            // 3-d reduction of the convolution integral.
            let n = 2000;
            let rsup = phi.support_radius();
            let hr = rsup / n as f64;
            let mut num = 0.0;
            if rho == 0.0 {
                num = radial_integral(3, rsup, 4000, |r| {
                    let f = phi.value_radial(r);
                    f * f
                });
            } else {
                for j in 0..=n {
                    let r = j as f64 * hr;
                    let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                    let mut inner = 0.0;
                    let m = 400;
                    let a = (rho - r).abs();
                    let b = rho + r;
                    let hs = (b - a) / m as f64;
                    for k in 0..=m {
                        let s = a + k as f64 * hs;
                        let ws = if k == 0 || k == m { 0.5 } else { 1.0 };
                        inner += ws * s * phi.value_radial(s);
                    }
                    num += w * r * phi.value_radial(r) * inner * hs;
                }
                num *= 2.0 * std::f64::consts::PI / rho * hr;
            }
            let closed = v.value_radial(rho);
            assert!(
                (num - closed).abs() <= 2e-5 * closed.abs().max(1e-3),
                "rho {rho}: numeric {num} vs closed {closed}"
            );
        }
    }
}
