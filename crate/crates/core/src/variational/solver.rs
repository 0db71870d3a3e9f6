//! Projected gradient ascent on the mass sphere.

use super::energy::{self, EnergyContext, RadialKernel};
use super::RadialProfile;
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Objectives handled by [`maximize`]; the mass constraint comes from the
/// solver config.
///
/// - `Chi`:   `int psi^4 - ||grad psi||^2`
/// - `Pekar`: `int int psi^2 psi^2 / |x-y| - ||grad psi||^2`
/// - `Pam`:   `2^{p-2} int int V psi^2 psi^2 - 1/2 ||grad psi||^2`
#[derive(Clone, Debug)]
pub enum Functional {
    Chi,
    Pekar,
    Pam { p: u8, kernel: RadialKernel },
}

impl Functional {
    fn kernel(&self) -> RadialKernel {
        match self {
            Functional::Chi => RadialKernel::Quartic,
            Functional::Pekar => RadialKernel::Coulomb { delta: 0.0 },
            Functional::Pam { kernel, .. } => kernel.clone(),
        }
    }

    /// `(interaction coefficient, kinetic coefficient)`.
    fn coefficients(&self) -> (f64, f64) {
        match self {
            Functional::Chi => (1.0, 1.0),
            Functional::Pekar => (1.0, 1.0),
            Functional::Pam { p, .. } => (2f64.powi(*p as i32 - 2), 0.5),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Grid spacing.
    pub h: f64,
    /// Number of panels; the profile has `n + 1` nodes.
    pub n: usize,
    /// Mass constraint `||psi||_2^2 = mass`.
    pub mass: f64,
    /// Initial step of the backtracking line search.
    pub step0: f64,
    pub max_iters: u64,
    /// Relative objective-change tolerance.
    pub tol_objective: f64,
    /// Euler-Lagrange residual tolerance in the radial L^2 norm.
    pub tol_residual: f64,
    /// Width of the Gaussian initialization.
    pub init_width: f64,
    /// Randomize the initialization (width jitter plus polynomial
    /// modulation) from this seed.
    pub init_seed: Option<u64>,
}

impl SolverConfig {
    pub fn new(h: f64, n: usize) -> Self {
        Self {
            h,
            n,
            mass: 1.0,
            step0: 0.1,
            max_iters: 50_000,
            tol_objective: 1e-9,
            tol_residual: 1e-6,
            init_width: 1.0,
            init_seed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || self.n < 8 {
            return Err(Error::InvalidParameter("bad solver grid".into()));
        }
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass {}", self.mass)));
        }
        if !(self.tol_objective > 0.0) || !(self.tol_residual > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be > 0".into()));
        }
        Ok(())
    }

    fn initial_profile(&self) -> Result<RadialProfile> {
        let mut width = self.init_width;
        let (mut a, mut b) = (0.0, 0.0);
        if let Some(seed) = self.init_seed {
            let mut rng = crate::rng::fixture_stream(seed);
            width *= (rng.gen::<f64>() * 1.4 - 0.7f64).exp();
            a = (rng.gen::<f64>() - 0.5) / width;
            b = (rng.gen::<f64>() * 0.5 - 0.25) / (width * width);
        }
        let values = (0..=self.n)
            .map(|i| {
                let r = i as f64 * self.h;
                let base = (-r * r / (2.0 * width * width)).exp();
                base * (1.0 + a * r + b * r * r).max(0.05)
            })
            .collect();
        RadialProfile::new(self.h, values)?.normalized(self.mass)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariationalResult {
    pub objective: f64,
    pub profile: RadialProfile,
    /// `|| dE/dpsi - lambda psi ||` in the radial L^2 norm at the final
    /// iterate, `lambda` the Rayleigh multiplier.
    pub residual: f64,
    pub iterations: u64,
    pub converged: bool,
    pub config: SolverConfig,
}

struct Evaluator {
    ctx: EnergyContext,
    coef_int: f64,
    coef_kin: f64,
    h: f64,
}

impl Evaluator {
    fn objective(&self, u: &[f64]) -> f64 {
        self.coef_int * self.ctx.interaction(u, u) - self.coef_kin * energy::kinetic(u, self.h)
    }

    /// Full gradient into `grad`; the scaled interaction part alone is left
    /// in `g_int` (the semi-implicit step needs it separately).
    fn gradient(&self, u: &[f64], grad: &mut [f64], g_int: &mut [f64]) {
        self.ctx.self_interaction_grad(u, g_int);
        for g in g_int.iter_mut() {
            *g *= self.coef_int;
        }
        energy::kinetic_grad(u, self.h, grad);
        for (g, s) in grad.iter_mut().zip(g_int.iter()) {
            *g = s - self.coef_kin * *g;
        }
    }
}

/// Solve the symmetric tridiagonal system in place; `diag` and `rhs` are
/// scratch.
fn thomas_solve(off: &[f64], diag: &mut [f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let m = off[i - 1] / diag[i - 1];
        diag[i] -= m * off[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
    }
}

fn normalize_to(u: &mut [f64], h: f64, target: f64) {
    let m = energy::mass(u, h);
    let c = (target / m).sqrt();
    for v in u.iter_mut() {
        *v *= c;
    }
}

/// Euler-Lagrange residual in the radial L^2 norm and the Rayleigh
/// multiplier, excluding the measure-zero origin node.
fn residual_norm(u: &[f64], grad: &[f64], h: f64, mass: f64) -> f64 {
    let mut gu = 0.0;
    for k in 1..u.len() {
        gu += grad[k] * u[k];
    }
    let lambda = gu / mass; // multiplier against the mass gradient 2 w u
    let mut r2 = 0.0;
    for k in 1..u.len() {
        let w = energy::node_weight(h, k);
        let d = grad[k] - lambda * w * u[k];
        r2 += d * d / w;
    }
    r2.sqrt()
}

/// Objective value and its exact coordinate gradient at a profile, for
/// gradient audits against finite differences.
pub fn objective_and_gradient(
    functional: &Functional,
    profile: &RadialProfile,
) -> Result<(f64, Vec<f64>)> {
    let (coef_int, coef_kin) = functional.coefficients();
    let eval = Evaluator {
        ctx: EnergyContext::new(&functional.kernel(), profile.h(), profile.n())?,
        coef_int,
        coef_kin,
        h: profile.h(),
    };
    let u = profile.values();
    let mut grad = vec![0.0; u.len()];
    let mut scratch = vec![0.0; u.len()];
    eval.gradient(u, &mut grad, &mut scratch);
    Ok((eval.objective(u), grad))
}

/// Maximize the functional on the sphere `mass(psi^2) = config.mass` by
/// preconditioned projected gradient ascent with a backtracking line
/// search. The objective never decreases across accepted iterations;
/// non-convergence within the iteration budget is flagged, not an error.
pub fn maximize(functional: &Functional, config: &SolverConfig) -> Result<VariationalResult> {
    maximize_with_init(functional, config, None)
}

/// [`maximize`] started from an explicit profile (warm start); the profile
/// is renormalized to the configured mass first.
pub fn maximize_with_init(
    functional: &Functional,
    config: &SolverConfig,
    init: Option<&RadialProfile>,
) -> Result<VariationalResult> {
    config.validate()?;
    if let Functional::Pam { p, .. } = functional {
        if !(1..=3).contains(p) {
            return Err(Error::InvalidParameter(format!("pam p {p}")));
        }
    }
    let (coef_int, coef_kin) = functional.coefficients();
    let eval = Evaluator {
        ctx: EnergyContext::new(&functional.kernel(), config.h, config.n)?,
        coef_int,
        coef_kin,
        h: config.h,
    };
    let h = config.h;
    let n_nodes = config.n + 1;

    // Semi-implicit ascent in the radial L^2 metric: a step of size eta
    // treats the (stiff) kinetic part implicitly and the interaction
    // explicitly, i.e. solves `(W + eta c_kin A) v = W u + eta g_int` with
    // `W` the node-weight diagonal (floored at the origin node) and `A` the
    // tridiagonal kinetic stiffness, then projects back to the sphere.
    let w_floor = energy::node_weight(h, 1) / 4.0;
    let w_diag: Vec<f64> = (0..n_nodes)
        .map(|k| energy::node_weight(h, k).max(w_floor))
        .collect();
    // faces of the kinetic gradient matrix: A u = kinetic_grad(u)
    let cface = 8.0 * std::f64::consts::PI / h;
    let a_off: Vec<f64> = (0..config.n)
        .map(|i| {
            let rm = (i as f64 + 0.5) * h;
            -cface * rm * rm
        })
        .collect();
    let a_diag: Vec<f64> = (0..n_nodes)
        .map(|i| {
            let left = if i > 0 { -a_off[i - 1] } else { 0.0 };
            let right = if i < config.n { -a_off[i] } else { 0.0 };
            left + right
        })
        .collect();

    let mut u = match init {
        Some(profile) => {
            if profile.h() != config.h || profile.n() != config.n {
                return Err(Error::InvalidParameter(
                    "warm-start profile must share the solver grid".into(),
                ));
            }
            profile.normalized(config.mass)?.values().to_vec()
        }
        None => config.initial_profile()?.values().to_vec(),
    };
    let mut grad = vec![0.0; n_nodes];
    let mut g_int = vec![0.0; n_nodes];
    let mut diag = vec![0.0; n_nodes];
    let mut trial = vec![0.0; n_nodes];
    let mut obj = eval.objective(&u);
    let mut eta = config.step0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iters {
        iterations += 1;
        eval.gradient(&u, &mut grad, &mut g_int);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("objective gradient"));
        }
        residual = residual_norm(&u, &grad, h, config.mass);

        let mut accepted = false;
        let mut improvement = 0.0;

        // Self-consistent step: solve the Euler-Lagrange equation
        // `(c_kin A + lambda W) v = g_int(u)` with the interaction and the
        // multiplier frozen at the current iterate. Near the maximizer this
        // contracts all modes at once; it is only kept when it does not
        // lower the objective.
        let mut gu = 0.0;
        for k in 1..n_nodes {
            gu += grad[k] * u[k];
        }
        let lambda = (gu / config.mass).max(0.05);
        {
            let scf_off: Vec<f64> = a_off.iter().map(|a| eval.coef_kin * a).collect();
            for k in 0..n_nodes {
                diag[k] = eval.coef_kin * a_diag[k] + lambda * w_diag[k];
                trial[k] = g_int[k];
            }
            thomas_solve(&scf_off, &mut diag, &mut trial);
            for v in trial.iter_mut() {
                *v = v.max(0.0);
            }
            if trial.iter().any(|v| v.is_finite() && *v > 0.0) {
                normalize_to(&mut trial, h, config.mass);
                let cand = eval.objective(&trial);
                if cand.is_finite() && cand >= obj {
                    improvement = cand - obj;
                    u.copy_from_slice(&trial);
                    obj = cand;
                    accepted = true;
                }
            }
        }

        for _ in 0..60 {
            if accepted {
                break;
            }
            // assemble and solve (W + eta c_kin A) v = W u + eta g_int
            let scaled_off: Vec<f64> =
                a_off.iter().map(|a| eta * eval.coef_kin * a).collect();
            for k in 0..n_nodes {
                diag[k] = w_diag[k] + eta * eval.coef_kin * a_diag[k];
                trial[k] = w_diag[k] * u[k] + eta * g_int[k];
            }
            thomas_solve(&scaled_off, &mut diag, &mut trial);
            for v in trial.iter_mut() {
                *v = v.max(0.0);
            }
            normalize_to(&mut trial, h, config.mass);
            let cand = eval.objective(&trial);
            // non-strict: near the optimum the gain drops below f64
            // resolution while the iterate still contracts the residual
            if cand >= obj {
                improvement = cand - obj;
                u.copy_from_slice(&trial);
                obj = cand;
                eta = (eta * 1.2).min(1e6);
                accepted = true;
                break;
            }
            eta *= 0.5;
            if eta < 1e-18 {
                break;
            }
        }
        if !accepted {
            // line search exhausted: stationary up to rounding
            converged = residual <= config.tol_residual;
            break;
        }
        if residual <= config.tol_residual
            && improvement <= config.tol_objective * obj.abs().max(1e-30)
        {
            converged = true;
            break;
        }
    }

    Ok(VariationalResult {
        objective: obj,
        profile: RadialProfile::new(h, u)?.normalized(config.mass)?,
        residual,
        iterations,
        converged,
        config: *config,
    })
}
