//! Discrete radial energies and their exact gradients.
//!
//! With node weights `w_i = 4 pi h r_i^2`:
//!
//! - mass       `sum w_i u_i^2`
//! - kinetic    `4 pi h sum ((u_{i+1} - u_i)/h)^2 r_{i+1/2}^2`
//! - quartic    `sum w_i u_i^4`
//! - pair terms `sum_ij w_i u_i^2 w_j u_j^2 Vbar(r_i, r_j)`, `Vbar` the
//!   spherical average of the kernel over relative angles.
//!
//! The Coulomb average is the shell theorem `1/max(r, s)` (or its
//! delta-regularized closed form), evaluated through prefix sums as a radial
//! Hartree potential. Gaussian pair kernels also average in closed form.

use super::RadialProfile;
use crate::error::{Error, Result};
use crate::measures::{MollifierKind, MollifierSpec, RadialTable};

pub(crate) fn node_weight(h: f64, i: usize) -> f64 {
    let r = i as f64 * h;
    4.0 * std::f64::consts::PI * h * r * r
}

pub(crate) fn mass(u: &[f64], h: f64) -> f64 {
    u.iter()
        .enumerate()
        .map(|(i, &v)| node_weight(h, i) * v * v)
        .sum()
}

/// `||grad psi||_2^2` by forward differences on the half-node shells.
pub(crate) fn kinetic(u: &[f64], h: f64) -> f64 {
    let four_pi = 4.0 * std::f64::consts::PI;
    let mut sum = 0.0;
    for i in 0..u.len() - 1 {
        let d = (u[i + 1] - u[i]) / h;
        let rm = (i as f64 + 0.5) * h;
        sum += d * d * rm * rm;
    }
    four_pi * h * sum
}

pub(crate) fn kinetic_grad(u: &[f64], h: f64, grad: &mut [f64]) {
    let four_pi = 4.0 * std::f64::consts::PI;
    let c = 2.0 * four_pi / h;
    for g in grad.iter_mut() {
        *g = 0.0;
    }
    for i in 0..u.len() - 1 {
        let rm = (i as f64 + 0.5) * h;
        let d = u[i + 1] - u[i];
        grad[i + 1] += c * d * rm * rm;
        grad[i] -= c * d * rm * rm;
    }
}

pub(crate) fn quartic(u: &[f64], h: f64) -> f64 {
    u.iter()
        .enumerate()
        .map(|(i, &v)| node_weight(h, i) * v.powi(4))
        .sum()
}

/// Radial Hartree potential of the density `v^2` under the shell kernel:
/// `Phi_k = 4 pi h [ (1/r_k) sum_{r_j <= r_k} v_j^2 r_j^2
///                   + sum_{r_j > r_k} v_j^2 r_j ]`.
pub(crate) fn hartree_potential(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let four_pi_h = 4.0 * std::f64::consts::PI * h;
    // prefix of v^2 r^2, suffix of v^2 r
    let mut inner = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        let r = i as f64 * h;
        acc += v[i] * v[i] * r * r;
        inner[i] = acc;
    }
    let mut outer = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        outer[i] = acc; // strictly larger radii
        let r = i as f64 * h;
        acc += v[i] * v[i] * r;
    }
    (0..n)
        .map(|k| {
            let r = k as f64 * h;
            let near = if k == 0 { 0.0 } else { inner[k] / r };
            four_pi_h * (near + outer[k])
        })
        .collect()
}

/// Spherically averaged pair kernel `Vbar(r, s)`.
#[derive(Clone, Debug)]
pub enum RadialKernel {
    /// Local quartic self-interaction `int psi^4`.
    Quartic,
    /// `V_delta(x) = (delta^2 + |x|^2)^{-1/2}`; `delta = 0` is the exact
    /// Coulomb kernel (shell theorem).
    Coulomb { delta: f64 },
    /// Self-convolution `phi_eps * phi_eps` of a Gaussian-kind mollifier,
    /// averaged in closed form.
    PairGaussian(MollifierSpec),
    /// Tabulated radial kernel, averaged by fixed Gauss-type quadrature in
    /// the relative angle.
    Tabulated(RadialTable),
}

impl RadialKernel {
    /// Spherical average of the kernel between shells of radii `r` and `s`.
    pub fn shell_average(&self, r: f64, s: f64) -> f64 {
        match self {
            RadialKernel::Quartic => panic!("quartic kernel has no shell average"),
            RadialKernel::Coulomb { delta } => {
                if *delta == 0.0 {
                    if r == 0.0 && s == 0.0 {
                        0.0 // never reached with r^2 weights
                    } else {
                        1.0 / r.max(s)
                    }
                } else {
                    let d2 = delta * delta;
                    let plus = (d2 + (r + s) * (r + s)).sqrt();
                    let minus = (d2 + (r - s) * (r - s)).sqrt();
                    if r * s < 1e-12 {
                        1.0 / (d2 + r * r + s * s).sqrt()
                    } else {
                        (plus - minus) / (2.0 * r * s)
                    }
                }
            }
            RadialKernel::PairGaussian(spec) => gaussian_shell_average(spec, r, s),
            RadialKernel::Tabulated(table) => {
                // average V(sqrt(r^2 + s^2 - 2 r s t)) over t in [-1, 1]
                let m = 64;
                let ht = 2.0 / m as f64;
                let mut sum = 0.0;
                for k in 0..=m {
                    let t = -1.0 + k as f64 * ht;
                    let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                    let d2 = (r * r + s * s - 2.0 * r * s * t).max(0.0);
                    sum += w * table.value_radial(d2.sqrt());
                }
                0.5 * sum * ht
            }
        }
    }
}

/// Closed-form shell average of the (truncated, renormalized) Gaussian pair
/// kernel `c exp(-d^2 / (4 eps^2))` with support cutoff `D`:
/// `(2 eps^2 c / (r s)) [exp(-a^2/(4 eps^2)) - exp(-b^2/(4 eps^2))]` with
/// `a = |r - s|`, `b = min(r + s, D)`.
fn gaussian_shell_average(spec: &MollifierSpec, r: f64, s: f64) -> f64 {
    debug_assert_eq!(spec.kind, MollifierKind::GaussianTruncated);
    let eps2 = spec.epsilon * spec.epsilon;
    let cutoff = 2.0 * spec.support_radius();
    let a = (r - s).abs();
    if a >= cutoff {
        return 0.0;
    }
    // normalization of the pair kernel at distance 0
    let pair = spec
        .pair_kernel(3)
        .expect("gaussian pair kernel is always constructible");
    let c = pair.value_radial(0.0);
    let b = (r + s).min(cutoff);
    let rs = r * s;
    if rs < 1e-10 {
        return c * (-(r * r + s * s) / (4.0 * eps2)).exp();
    }
    let ea = (-a * a / (4.0 * eps2)).exp();
    let eb = (-b * b / (4.0 * eps2)).exp();
    eps2 * c * (ea - eb) / rs
}

/// Precomputed state for repeated interaction evaluations on a fixed grid.
pub struct EnergyContext {
    h: f64,
    n_nodes: usize,
    kernel: RadialKernelImpl,
}

enum RadialKernelImpl {
    Quartic,
    /// Prefix-sum Hartree under the exact shell theorem.
    CoulombShell,
    /// Dense shell-average matrix.
    Matrix(Vec<f64>),
}

impl EnergyContext {
    /// Build the evaluation context; dense kernels precompute the
    /// `(n+1) x (n+1)` shell-average matrix.
    pub fn new(kernel: &RadialKernel, h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || n < 2 {
            return Err(Error::InvalidParameter("bad energy grid".into()));
        }
        let n_nodes = n + 1;
        let kernel = match kernel {
            RadialKernel::Quartic => RadialKernelImpl::Quartic,
            RadialKernel::Coulomb { delta } if *delta == 0.0 => RadialKernelImpl::CoulombShell,
            RadialKernel::PairGaussian(spec) => {
                // inline the closed form with the normalization hoisted out
                let eps2 = spec.epsilon * spec.epsilon;
                let cutoff = 2.0 * spec.support_radius();
                let c = spec.pair_kernel(3)?.value_radial(0.0);
                let mut matrix = vec![0.0; n_nodes * n_nodes];
                for i in 0..n_nodes {
                    let r = i as f64 * h;
                    for j in i..n_nodes {
                        let s = j as f64 * h;
                        let a = s - r;
                        let v = if a >= cutoff {
                            0.0
                        } else if r * s < 1e-10 {
                            c * (-(r * r + s * s) / (4.0 * eps2)).exp()
                        } else {
                            let b = (r + s).min(cutoff);
                            let ea = (-a * a / (4.0 * eps2)).exp();
                            let eb = (-b * b / (4.0 * eps2)).exp();
                            eps2 * c * (ea - eb) / (r * s)
                        };
                        matrix[i * n_nodes + j] = v;
                        matrix[j * n_nodes + i] = v;
                    }
                }
                RadialKernelImpl::Matrix(matrix)
            }
            other => {
                let mut matrix = vec![0.0; n_nodes * n_nodes];
                for i in 0..n_nodes {
                    let r = i as f64 * h;
                    for j in i..n_nodes {
                        let s = j as f64 * h;
                        let v = other.shell_average(r, s);
                        matrix[i * n_nodes + j] = v;
                        matrix[j * n_nodes + i] = v;
                    }
                }
                RadialKernelImpl::Matrix(matrix)
            }
        };
        Ok(Self { h, n_nodes, kernel })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Interaction `sum_ij w_i u_i^2 w_j v_j^2 Vbar(r_i, r_j)` between two
    /// profiles (`u = v` gives the self-interaction). For the quartic kernel
    /// this is the local integral `int u^2 v^2`.
    pub fn interaction(&self, u: &[f64], v: &[f64]) -> f64 {
        assert_eq!(u.len(), self.n_nodes);
        assert_eq!(v.len(), self.n_nodes);
        let h = self.h;
        match &self.kernel {
            RadialKernelImpl::Quartic => (0..self.n_nodes)
                .map(|i| node_weight(h, i) * u[i] * u[i] * v[i] * v[i])
                .sum(),
            RadialKernelImpl::CoulombShell => {
                let phi = hartree_potential(v, h);
                (0..self.n_nodes)
                    .map(|i| node_weight(h, i) * u[i] * u[i] * phi[i])
                    .sum()
            }
            RadialKernelImpl::Matrix(m) => {
                let q: Vec<f64> = (0..self.n_nodes)
                    .map(|j| node_weight(h, j) * v[j] * v[j])
                    .collect();
                let mut total = 0.0;
                for i in 0..self.n_nodes {
                    let row = &m[i * self.n_nodes..(i + 1) * self.n_nodes];
                    let mut acc = 0.0;
                    for (mj, qj) in row.iter().zip(&q) {
                        acc += mj * qj;
                    }
                    total += node_weight(h, i) * u[i] * u[i] * acc;
                }
                total
            }
        }
    }

    /// Gradient of the self-interaction `I(u) = interaction(u, u)`:
    /// `dI/du_k = 4 u_k w_k Phi_k` with `Phi` the kernel potential of
    /// `u^2`.
    pub fn self_interaction_grad(&self, u: &[f64], grad: &mut [f64]) {
        let h = self.h;
        match &self.kernel {
            RadialKernelImpl::Quartic => {
                for (k, g) in grad.iter_mut().enumerate() {
                    *g = 4.0 * node_weight(h, k) * u[k] * u[k] * u[k];
                }
            }
            RadialKernelImpl::CoulombShell => {
                let phi = hartree_potential(u, h);
                for (k, g) in grad.iter_mut().enumerate() {
                    *g = 4.0 * node_weight(h, k) * u[k] * phi[k];
                }
            }
            RadialKernelImpl::Matrix(m) => {
                let q: Vec<f64> = (0..self.n_nodes)
                    .map(|j| node_weight(h, j) * u[j] * u[j])
                    .collect();
                for k in 0..self.n_nodes {
                    let row = &m[k * self.n_nodes..(k + 1) * self.n_nodes];
                    let mut acc = 0.0;
                    for (mj, qj) in row.iter().zip(&q) {
                        acc += mj * qj;
                    }
                    grad[k] = 4.0 * node_weight(h, k) * u[k] * acc;
                }
            }
        }
    }
}

/// `(interaction, kinetic)` of a profile under the given kernel:
/// `kinetic = ||grad psi||^2`, `interaction = int int V psi^2 psi^2`
/// (or `int psi^4` for the quartic kernel).
pub fn energy_terms(psi: &RadialProfile, kernel: &RadialKernel) -> Result<(f64, f64)> {
    if !(psi.mass() > 0.0) {
        return Err(Error::ZeroDensity);
    }
    let ctx = EnergyContext::new(kernel, psi.h(), psi.n())?;
    let u = psi.values();
    Ok((ctx.interaction(u, u), kinetic(u, psi.h())))
}

/// Cross interaction `int int V psi^2 phi^2` of two profiles on a shared
/// grid.
pub fn interaction_cross(
    psi: &RadialProfile,
    phi: &RadialProfile,
    kernel: &RadialKernel,
) -> Result<f64> {
    if psi.h() != phi.h() || psi.n() != phi.n() {
        return Err(Error::InvalidParameter(
            "profiles must share a grid".into(),
        ));
    }
    let ctx = EnergyContext::new(kernel, psi.h(), psi.n())?;
    Ok(ctx.interaction(psi.values(), phi.values()))
}
