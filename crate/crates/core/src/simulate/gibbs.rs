//! Gibbs models on path pairs: interaction exponents.
//!
//! All weights are returned in the log domain (the exponent, not its
//! exponential). Time integrals `int_0^t int_0^t ... dsigma ds` are
//! discretized as `dt^2`-weighted double sums over the recorded positions
//! with trapezoidal end weights, matching the occupation-measure quadrature,
//! so the identity `l_eps_t(R^d) = t^2 H_{V_eps}(L1, L2)` is exact.

use super::{occupation, BrownianPath};
use crate::error::{Error, Result};
use crate::measures::{pairwise_energy, AtomicMeasure, Kernel, MollifierSpec, PreparedKernel};

/// Gibbs reweighting models for mutually interacting paths.
#[derive(Clone, Debug)]
pub enum GibbsModel {
    /// Mollified Dirac interaction: log-weight `l_{eps,t}(R^d) / t`.
    DiracMollified {
        mollifier: MollifierSpec,
        horizon: f64,
    },
    /// Regularized Coulomb: log-weight `t * H_{V_delta}(L1, L2)`,
    /// `V_delta(x) = (delta^2 + |x|^2)^{-1/2}` with `delta > 0`.
    CoulombRegularized { delta: f64, horizon: f64 },
    /// Smoothed-noise moment exponent on `p` paths over horizon
    /// `tau`: `(1/(2 tau)) sum_{i,j=1..p} int int V(W^i_s - W^j_u)`,
    /// `V` the self-convolution of the mollifier.
    Pam {
        p: u8,
        mollifier: MollifierSpec,
        horizon: f64,
    },
}

impl GibbsModel {
    pub fn horizon(&self) -> f64 {
        match self {
            GibbsModel::DiracMollified { horizon, .. } => *horizon,
            GibbsModel::CoulombRegularized { horizon, .. } => *horizon,
            GibbsModel::Pam { horizon, .. } => *horizon,
        }
    }

    /// Number of independent paths the model's exponent consumes.
    pub fn path_count(&self) -> usize {
        match self {
            GibbsModel::Pam { p, .. } => *p as usize,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon() > 0.0) {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        match self {
            GibbsModel::CoulombRegularized { delta, .. } if !(*delta > 0.0) => Err(
                Error::InvalidParameter(format!("coulomb delta {delta} must be > 0")),
            ),
            GibbsModel::Pam { p, .. } if !(1..=3).contains(p) => {
                Err(Error::InvalidParameter(format!("pam p {p} not in 1..=3")))
            }
            _ => Ok(()),
        }
    }

    /// Interaction kernel of the model.
    pub fn kernel(&self) -> Kernel {
        match self {
            GibbsModel::DiracMollified { mollifier, .. } => Kernel::MollifiedDelta(*mollifier),
            GibbsModel::CoulombRegularized { delta, .. } => {
                Kernel::RegularizedCoulomb { delta: *delta }
            }
            GibbsModel::Pam { mollifier, .. } => Kernel::MollifiedDelta(*mollifier),
        }
    }
}

/// Recommended step size: resolve the mollifier scale but keep at least a
/// thousand steps per horizon.
pub fn default_dt(kernel_scale: f64, t: f64) -> f64 {
    (kernel_scale * kernel_scale / 10.0).min(t / 1000.0)
}

/// Path positions with raw time weights `dt` (trapezoidal ends), i.e. the
/// occupation measure scaled by the horizon.
pub fn time_weighted_measure(path: &BrownianPath) -> Result<AtomicMeasure> {
    occupation(path)?.scaled(path.horizon())
}

fn check_horizon(expected: f64, path: &BrownianPath) -> Result<()> {
    let got = path.horizon();
    if (got - expected).abs() > 1e-9 * expected.max(1.0) {
        return Err(Error::HorizonMismatch { expected, got });
    }
    Ok(())
}

/// Total mollified intersection mass
/// `l_{eps,t}(R^d) = t^2 int L1_eps(y) L2_eps(y) dy`, computed in kernel
/// form as the `V_eps`-energy of the two occupation measures.
pub fn intersection_mass(
    p1: &BrownianPath,
    p2: &BrownianPath,
    spec: &MollifierSpec,
) -> Result<f64> {
    let kernel = Kernel::MollifiedDelta(*spec).prepare(p1.dim())?;
    intersection_mass_with_kernel(p1, p2, &kernel)
}

/// Kernel-form intersection mass with a pre-prepared `V_eps`.
pub fn intersection_mass_with_kernel(
    p1: &BrownianPath,
    p2: &BrownianPath,
    kernel: &PreparedKernel,
) -> Result<f64> {
    check_horizon(p1.horizon(), p2)?;
    let t1 = time_weighted_measure(p1)?;
    let t2 = time_weighted_measure(p2)?;
    pairwise_energy(&t1, &t2, kernel)
}

/// `coupling * sum_{i,j} int int V(W^i_s - W^j_u) ds du` over all ordered
/// path pairs, self pairs included.
pub fn pam_exponent_with(
    paths: &[&BrownianPath],
    kernel: &PreparedKernel,
    coupling: f64,
) -> Result<f64> {
    let weighted: Vec<AtomicMeasure> = paths
        .iter()
        .map(|p| time_weighted_measure(p))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for wi in &weighted {
        for wj in &weighted {
            total += pairwise_energy(wi, wj, kernel)?;
        }
    }
    Ok(coupling * total)
}

/// Log-weight of the model on the given paths.
///
/// Requires `paths.len() == model.path_count()` and matching horizons.
pub fn gibbs_weight(model: &GibbsModel, paths: &[&BrownianPath]) -> Result<f64> {
    let kernel = model.kernel().prepare(paths[0].dim())?;
    gibbs_weight_with_kernel(model, paths, &kernel)
}

/// Log-weight with a pre-prepared kernel (for Monte Carlo loops).
pub fn gibbs_weight_with_kernel(
    model: &GibbsModel,
    paths: &[&BrownianPath],
    kernel: &PreparedKernel,
) -> Result<f64> {
    model.validate()?;
    if paths.len() != model.path_count() {
        return Err(Error::InvalidParameter(format!(
            "model needs {} paths, got {}",
            model.path_count(),
            paths.len()
        )));
    }
    let t = model.horizon();
    for p in paths {
        check_horizon(t, p)?;
    }
    match model {
        GibbsModel::DiracMollified { .. } => {
            Ok(intersection_mass_with_kernel(paths[0], paths[1], kernel)? / t)
        }
        GibbsModel::CoulombRegularized { .. } => {
            let l1 = occupation(paths[0])?;
            let l2 = occupation(paths[1])?;
            Ok(t * pairwise_energy(&l1, &l2, kernel)?)
        }
        GibbsModel::Pam { .. } => pam_exponent_with(paths, kernel, 0.5 / t),
    }
}
