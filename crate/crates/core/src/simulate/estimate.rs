//! Monte Carlo estimators on replicated path draws.
//!
//! Replicas are embarrassingly parallel; every replica owns the RNG streams
//! `(seed, replica, role)` for its paths, partial results are collected in
//! replica order and reduced sequentially, so estimates are bit-identical
//! across thread counts.

use super::{gibbs::gibbs_weight_with_kernel, occupation, sample_path, GibbsModel};
use crate::compactify::{decompose, match_pairs, DecomposeParams};
use crate::error::{Error, Result};
use crate::measures::MollifierSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A Monte Carlo estimate with its sampling diagnostics.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MCEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    /// True when `value` came through a log-mean-exp reduction.
    pub log_domain: bool,
    /// Effective sample size of the exponential weights.
    pub ess: f64,
}

/// Max-shifted log-mean-exp with a delta-method standard error and the
/// usual effective-sample-size diagnostic. Returns `(lme, se, ess)`.
pub fn log_mean_exp(values: &[f64]) -> (f64, f64, f64) {
    assert!(!values.is_empty());
    let n = values.len() as f64;
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return (m, 0.0, 0.0);
    }
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for v in values {
        let e = (v - m).exp();
        sum += e;
        sum2 += e * e;
    }
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    let se = if values.len() > 1 {
        (var / (n - 1.0)).sqrt() / mean
    } else {
        0.0
    };
    let ess = if sum2 > 0.0 { sum * sum / sum2 } else { n };
    (m + mean.ln(), se, ess)
}

/// Sample `n_samples` replicas of the model's path tuple and return the
/// horizon-normalized log-mean-exp of the Gibbs exponents:
/// `(1/t) log Z_t` for the pair models, `eps^2 log m_p` for the
/// smoothed-noise model.
pub fn estimate_log_partition(
    model: &GibbsModel,
    dt: f64,
    n_samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    model.validate()?;
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need n_samples >= 2".into()));
    }
    let dim = 3;
    let t = model.horizon();
    let dt = snap_dt(t, dt)?;
    let kernel = model.kernel().prepare(dim)?;
    let n_paths = model.path_count();
    let weights: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|replica| -> Result<f64> {
            let paths: Vec<_> = (0..n_paths)
                .map(|role| sample_path(dim, t, dt, &[0.0; 3], seed, replica, role as u64))
                .collect::<Result<_>>()?;
            let refs: Vec<&_> = paths.iter().collect();
            gibbs_weight_with_kernel(model, &refs, &kernel)
        })
        .collect::<Result<_>>()?;
    let (lme, se, ess) = log_mean_exp(&weights);
    Ok(MCEstimate {
        value: lme / t,
        std_error: se / t,
        n_samples,
        seed,
        log_domain: true,
        ess,
    })
}

/// Adjust `dt` so the horizon is a whole number of steps.
fn snap_dt(t: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0) || dt > t {
        return Err(Error::InvalidParameter(format!("t {t}, dt {dt}")));
    }
    let steps = (t / dt).round().max(1.0);
    Ok(t / steps)
}

/// Default cap on `horizon / dt`.
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// Estimate the rescaled moment exponent `eps^2 log m_p(eps)` by
/// log-mean-exp over `n_samples` draws of `p` independent paths from a
/// common start, horizon `tau = eps^-2`.
///
/// `dt` defaults to `min(phi_eps_width^2 / 10, tau / 1000)` and must satisfy
/// `dt <= eps^2 / 4`; runs whose step count exceeds `step_budget` are
/// rejected.
pub fn estimate_pam_moment(
    p: u8,
    epsilon: f64,
    mollifier: &MollifierSpec,
    dt: Option<f64>,
    n_samples: u64,
    seed: u64,
    step_budget: u64,
) -> Result<MCEstimate> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} not in (0, 1]"
        )));
    }
    let tau = 1.0 / (epsilon * epsilon);
    let dt = snap_dt(
        tau,
        dt.unwrap_or_else(|| super::gibbs::default_dt(mollifier.epsilon, tau)),
    )?;
    if dt > epsilon * epsilon / 4.0 {
        return Err(Error::InvalidParameter(format!(
            "dt {dt} must be <= eps^2/4 = {}",
            epsilon * epsilon / 4.0
        )));
    }
    let steps = (tau / dt).round() as u64;
    if steps > step_budget {
        return Err(Error::StepBudget {
            steps,
            budget: step_budget,
        });
    }
    let model = GibbsModel::Pam {
        p,
        mollifier: *mollifier,
        horizon: tau,
    };
    estimate_log_partition(&model, dt, n_samples, seed)
}

/// Decomposition protocol of the localization experiment.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LocalizationParams {
    pub decompose: DecomposeParams,
    pub match_radius: f64,
    /// A sample is "localized" when one matched pair carries at least this
    /// fraction of both occupation masses.
    pub dominance: f64,
    /// Cell size for coarsening occupation measures before peeling.
    pub coarsen: f64,
}

/// Gibbs-weighted versus unweighted frequency of single-dominant-pair
/// decompositions, with a paired standard error for the difference.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GibbsLocalizationSummary {
    pub weighted_freq: f64,
    pub unweighted_freq: f64,
    /// Standard error of `weighted_freq - unweighted_freq` (delta method on
    /// the per-sample influence values).
    pub diff_std_error: f64,
    pub z_score: f64,
    pub ess: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub params: LocalizationParams,
}

/// For each sampled path pair: decompose both occupation measures, match
/// them, and record whether a single matched pair dominates. Reports the
/// Gibbs-weighted and unweighted frequencies of that event.
pub fn gibbs_reweighted_decomposition(
    model: &GibbsModel,
    dt: f64,
    n_samples: u64,
    seed: u64,
    params: &LocalizationParams,
) -> Result<GibbsLocalizationSummary> {
    model.validate()?;
    if model.path_count() != 2 {
        return Err(Error::InvalidParameter(
            "localization runs on two-path models".into(),
        ));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need n_samples >= 2".into()));
    }
    let dim = 3;
    let t = model.horizon();
    let dt = snap_dt(t, dt)?;
    let kernel = model.kernel().prepare(dim)?;
    let rows: Vec<(f64, bool)> = (0..n_samples)
        .into_par_iter()
        .map(|replica| -> Result<(f64, bool)> {
            let p1 = sample_path(dim, t, dt, &[0.0; 3], seed, replica, 0)?;
            let p2 = sample_path(dim, t, dt, &[0.0; 3], seed, replica, 1)?;
            let logw = gibbs_weight_with_kernel(model, &[&p1, &p2], &kernel)?;
            let l1 = occupation(&p1)?.coarsened(params.coarsen)?;
            let l2 = occupation(&p2)?.coarsened(params.coarsen)?;
            let d1 = decompose(&l1, params.decompose)?;
            let d2 = decompose(&l2, params.decompose)?;
            // Separation failures mean the components crowd the match
            // radius; that is a delocalized configuration.
            let localized = match match_pairs(&d1, &d2, params.match_radius) {
                Ok(xi) => xi.pairs.iter().any(|pair| {
                    pair.alpha.total_mass() >= params.dominance * l1.total_mass()
                        && pair.beta.total_mass() >= params.dominance * l2.total_mass()
                }),
                Err(Error::Separation(_)) => false,
                Err(e) => return Err(e),
            };
            Ok((logw, localized))
        })
        .collect::<Result<_>>()?;

    let n = rows.len() as f64;
    let max_logw = rows
        .iter()
        .map(|(w, _)| *w)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = rows.iter().map(|(w, _)| (w - max_logw).exp()).collect();
    let flags: Vec<f64> = rows
        .iter()
        .map(|(_, x)| if *x { 1.0 } else { 0.0 })
        .collect();
    let wbar = weights.iter().sum::<f64>() / n;
    let wsum2 = weights.iter().map(|w| w * w).sum::<f64>();
    let weighted_freq =
        weights.iter().zip(&flags).map(|(w, x)| w * x).sum::<f64>() / (wbar * n);
    let unweighted_freq = flags.iter().sum::<f64>() / n;

    // influence of sample i on the frequency difference
    let mut var = 0.0;
    for (w, x) in weights.iter().zip(&flags) {
        let d = w * (x - weighted_freq) / wbar - (x - unweighted_freq);
        var += d * d;
    }
    let diff_std_error = (var / (n * (n - 1.0))).sqrt();
    let diff = weighted_freq - unweighted_freq;
    let z_score = if diff_std_error > 0.0 {
        diff / diff_std_error
    } else {
        0.0
    };
    let ess = if wsum2 > 0.0 {
        let s: f64 = weights.iter().sum();
        s * s / wsum2
    } else {
        n
    };
    Ok(GibbsLocalizationSummary {
        weighted_freq,
        unweighted_freq,
        diff_std_error,
        z_score,
        ess,
        n_samples,
        seed,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Kernel;
    use crate::simulate::pam_exponent_with;

    #[test]
    fn log_mean_exp_basics() {
        let (lme, se, ess) = log_mean_exp(&[0.0, 0.0, 0.0]);
        assert_eq!(lme, 0.0);
        assert_eq!(se, 0.0);
        assert!((ess - 3.0).abs() < 1e-12);

        // large shifts do not overflow
        let (lme, _, _) = log_mean_exp(&[1000.0, 1002.0]);
        let expected = 1002.0 + ((1.0f64 + (-2.0f64).exp()) / 2.0).ln();
        assert!((lme - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_kernel_estimates_zero_with_zero_error() {
        // a zero tabulated kernel makes every exponent vanish identically
        let table = crate::measures::RadialTable::new(1.0, vec![0.0, 0.0, 0.0]).unwrap();
        let kernel = Kernel::Tabulated(table).prepare(3).unwrap();
        let mut values = Vec::new();
        for replica in 0..64u64 {
            let p = sample_path(3, 1.0, 0.05, &[0.0; 3], 3, replica, 0).unwrap();
            values.push(pam_exponent_with(&[&p], &kernel, 0.5).unwrap());
        }
        let (lme, se, _) = log_mean_exp(&values);
        assert_eq!(lme, 0.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn estimator_is_deterministic_and_respects_jensen() {
        let model = GibbsModel::CoulombRegularized {
            delta: 1.0,
            horizon: 1.0,
        };
        let a = estimate_log_partition(&model, 0.02, 200, 99).unwrap();
        let b = estimate_log_partition(&model, 0.02, 200, 99).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.std_error, b.std_error);
        assert!(a.value >= 0.0);

        // Jensen: (1/t) log mean(e^X) >= (1/t) mean(X), up to MC noise
        let dim = 3;
        let kernel = model.kernel().prepare(dim).unwrap();
        let mut mean_logw = 0.0;
        for replica in 0..200u64 {
            let p1 = sample_path(dim, 1.0, 0.02, &[0.0; 3], 99, replica, 0).unwrap();
            let p2 = sample_path(dim, 1.0, 0.02, &[0.0; 3], 99, replica, 1).unwrap();
            mean_logw +=
                gibbs_weight_with_kernel(&model, &[&p1, &p2], &kernel).unwrap();
        }
        mean_logw /= 200.0;
        assert!(a.value >= mean_logw - 3.0 * a.std_error);
    }

    #[test]
    fn pam_moment_estimates_are_nondecreasing_in_p() {
        // moments share the replica streams, so path 0 of replica k is
        // common to all p; with a nonnegative kernel the exponent grows
        // with every extra pair term
        let spec = MollifierSpec::gaussian(1.0).unwrap();
        let eps = 0.6;
        let mut previous = f64::NEG_INFINITY;
        for p in 1..=3u8 {
            let est =
                estimate_pam_moment(p, eps, &spec, Some(0.05), 64, 31, DEFAULT_STEP_BUDGET)
                    .unwrap();
            assert!(
                est.value >= previous - 1e-12,
                "p {p}: {} < {previous}",
                est.value
            );
            previous = est.value;
        }
    }

    #[test]
    fn pam_moment_validates_inputs() {
        let spec = MollifierSpec::gaussian(1.0).unwrap();
        assert!(estimate_pam_moment(1, 1.5, &spec, None, 10, 1, DEFAULT_STEP_BUDGET).is_err());
        assert!(matches!(
            estimate_pam_moment(1, 0.1, &spec, Some(1e-6), 10, 1, 1000),
            Err(Error::StepBudget { .. })
        ));
        // dt above eps^2/4 is rejected
        assert!(estimate_pam_moment(1, 0.2, &spec, Some(0.05), 10, 1, DEFAULT_STEP_BUDGET).is_err());
    }
}
