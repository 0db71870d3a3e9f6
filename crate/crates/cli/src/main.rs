//! `occupath`: decompose measures, match decompositions, run Gibbs path
//! simulations, solve the radial variational problems, and run the scripted
//! experiments.
//!
//! Exit codes: 0 success, 1 numerical non-convergence (results are still
//! written, flagged), 2 input or validation error (a one-line JSON error
//! record goes to stdout).

mod manifest;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use occupath_core::compactify::{decompose, match_pairs, DecomposeParams, Decomposition};
use occupath_core::experiments;
use occupath_core::simulate::{
    default_dt, estimate_log_partition, estimate_pam_moment, GibbsModel, MCEstimate,
    DEFAULT_STEP_BUDGET,
};
use occupath_core::variational::{maximize, Functional, RadialKernel, SolverConfig};
use occupath_core::{AtomicMeasure, MollifierSpec};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "occupath", version, about)]
struct Cli {
    /// Base RNG seed for commands that sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Directory all outputs and manifests are written into.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Peel an atomic measure (CSV) into components plus dust.
    Decompose(DecomposeArgs),
    /// Match two decompositions (JSON) into an orbit collection.
    Match(MatchArgs),
    /// Maximize a radial variational functional.
    Solve(SolveArgs),
    /// Monte Carlo estimate of a Gibbs log-partition exponent.
    Simulate(SimulateArgs),
    /// Moment-exponent sweep of the smoothed-noise model.
    Moments(MomentsArgs),
    /// Run a named scripted experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input CSV with header `x1,...,xd,weight`.
    #[arg(long)]
    input: PathBuf,
    /// Concentration ball radius; defaults to 3 x the median
    /// nearest-neighbor spacing of the atoms.
    #[arg(long)]
    window_radius: Option<f64>,
    #[arg(long, default_value_t = occupath_core::compactify::DEFAULT_MASS_FLOOR)]
    mass_floor: f64,
    #[arg(long, default_value_t = occupath_core::compactify::DEFAULT_SEPARATION_FACTOR)]
    separation: f64,
    #[arg(long, default_value = "decomposition.json")]
    out: PathBuf,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    /// Match radius: centers within this distance pair up.
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value = "orbits.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// One of: chi, pekar, pam.
    #[arg(long)]
    functional: String,
    /// Moment order for pam.
    #[arg(long, default_value_t = 1)]
    p: u8,
    /// Mass constraint.
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 2000)]
    grid_n: usize,
    #[arg(long, default_value_t = 0.01)]
    grid_h: f64,
    /// Relative objective tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Euler-Lagrange residual tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol_residual: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: u64,
    /// Mollifier width of the pam kernel `V = phi * phi`.
    #[arg(long, default_value_t = 1.0)]
    eps_phi: f64,
    /// Width of the Gaussian initialization.
    #[arg(long, default_value_t = 1.0)]
    init_width: f64,
    /// Extra randomized restarts; the best objective is reported.
    #[arg(long, default_value_t = 0)]
    restarts: u64,
    #[arg(long, default_value = "solve.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// One of: dirac, coulomb, pam.
    #[arg(long)]
    model: String,
    /// Horizon (tau = eps^-2 is implied for pam when --t is omitted).
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Mollifier width (dirac) or rescaling parameter (pam).
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Mollifier width of the pam base kernel.
    #[arg(long, default_value_t = 1.0)]
    eps_phi: f64,
    /// Coulomb regularization.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    p: u8,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value = "simulate.json")]
    out: PathBuf,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long, default_value_t = 1)]
    p: u8,
    /// Comma-separated rescaling parameters.
    #[arg(long, default_value = "0.5,0.4,0.3")]
    eps: String,
    #[arg(long, default_value_t = 1.0)]
    eps_phi: f64,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value = "moments.json")]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// One of: intermittency-ordering, pam-mc-vs-variational,
    /// gibbs-localization, footnote-convergence.
    name: String,
    /// Sample-count override for the Monte Carlo experiments.
    #[arg(long)]
    samples: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            // one-line machine-readable error record
            println!(
                "{}",
                serde_json::json!({ "error": format!("{err:#}") })
            );
            std::process::exit(2);
        }
    }
}

fn out_path(cli: &Cli, name: &Path) -> PathBuf {
    if name.is_absolute() {
        name.to_path_buf()
    } else {
        cli.out_dir.join(name)
    }
}

fn write_result<T: Serialize>(
    cli: &Cli,
    out: &Path,
    params: serde_json::Value,
    value: &T,
) -> anyhow::Result<PathBuf> {
    let path = out_path(cli, out);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let json = serde_json::to_vec_pretty(value)?;
    std::fs::write(&path, &json)?;
    manifest::write_manifest(&path, params, cli.seed)?;
    Ok(path)
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Decompose(args) => cmd_decompose(cli, args),
        Command::Match(args) => cmd_match(cli, args),
        Command::Solve(args) => cmd_solve(cli, args),
        Command::Simulate(args) => cmd_simulate(cli, args),
        Command::Moments(args) => cmd_moments(cli, args),
        Command::Experiment(args) => cmd_experiment(cli, args),
    }
}

/// 3 x the median nearest-neighbor spacing, the documented fallback when no
/// window radius is given.
fn default_window_radius(measure: &AtomicMeasure) -> f64 {
    let n = measure.len();
    let mut nn = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = f64::INFINITY;
        for j in 0..n {
            if i != j {
                let d = measure.dist_to(i, measure.location(j));
                if d < best {
                    best = d;
                }
            }
        }
        nn.push(best);
    }
    nn.sort_by(|a, b| a.partial_cmp(b).unwrap());
    3.0 * nn[n / 2]
}

fn cmd_decompose(cli: &Cli, args: &DecomposeArgs) -> anyhow::Result<i32> {
    let file = std::fs::File::open(&args.input)
        .with_context(|| format!("opening {}", args.input.display()))?;
    let measure = AtomicMeasure::read_csv(file).context("parsing measure CSV")?;
    let radius = match args.window_radius {
        Some(r) => r,
        None => default_window_radius(&measure),
    };
    let params = DecomposeParams::new(radius, args.mass_floor, args.separation)?;
    let result = decompose(&measure, params)?;
    let path = write_result(
        cli,
        &args.out,
        serde_json::json!({
            "command": "decompose",
            "input": args.input.display().to_string(),
            "window_radius": radius,
            "mass_floor": args.mass_floor,
            "separation_factor": args.separation,
        }),
        &result,
    )?;
    eprintln!(
        "decompose: {} components, dust {:.6} -> {}",
        result.components.len(),
        result.dust_mass,
        path.display()
    );
    Ok(0)
}

fn cmd_match(cli: &Cli, args: &MatchArgs) -> anyhow::Result<i32> {
    let left = Decomposition::read_json(std::fs::File::open(&args.left)?)
        .context("parsing left decomposition")?;
    let right = Decomposition::read_json(std::fs::File::open(&args.right)?)
        .context("parsing right decomposition")?;
    let xi = match_pairs(&left, &right, args.radius)?;
    let path = write_result(
        cli,
        &args.out,
        serde_json::json!({
            "command": "match",
            "left": args.left.display().to_string(),
            "right": args.right.display().to_string(),
            "radius": args.radius,
        }),
        &xi,
    )?;
    eprintln!("match: {} pairs -> {}", xi.pairs.len(), path.display());
    Ok(0)
}

#[derive(Serialize)]
struct SolveOutput {
    functional: String,
    version: String,
    objective: f64,
    residual: f64,
    iterations: u64,
    converged: bool,
    config: SolverConfig,
    profile_h: f64,
    profile_values: Vec<f64>,
}

fn cmd_solve(cli: &Cli, args: &SolveArgs) -> anyhow::Result<i32> {
    let functional = match args.functional.as_str() {
        "chi" => Functional::Chi,
        "pekar" => Functional::Pekar,
        "pam" => Functional::Pam {
            p: args.p,
            kernel: RadialKernel::PairGaussian(MollifierSpec::gaussian(args.eps_phi)?),
        },
        other => return Err(anyhow!("unknown functional {other:?}")),
    };
    let mut config = SolverConfig::new(args.grid_h, args.grid_n);
    config.mass = args.mass;
    config.tol_objective = args.tol;
    config.tol_residual = args.tol_residual;
    config.max_iters = args.max_iters;
    config.init_width = args.init_width;

    let mut best = maximize(&functional, &config)?;
    for restart in 0..args.restarts {
        let mut cfg = config;
        cfg.init_seed = Some(cli.seed.wrapping_add(restart));
        let res = maximize(&functional, &cfg)?;
        if res.objective > best.objective {
            best = res;
        }
    }
    let output = SolveOutput {
        functional: args.functional.clone(),
        version: occupath_core::VERSION.into(),
        objective: best.objective,
        residual: best.residual,
        iterations: best.iterations,
        converged: best.converged,
        config: best.config,
        profile_h: best.profile.h(),
        profile_values: best.profile.values().to_vec(),
    };
    let path = write_result(
        cli,
        &args.out,
        serde_json::json!({
            "command": "solve",
            "functional": args.functional,
            "p": args.p,
            "eps_phi": args.eps_phi,
            "restarts": args.restarts,
        }),
        &output,
    )?;
    eprintln!(
        "solve {}: objective {:.9}, residual {:.3e}, converged {} -> {}",
        args.functional,
        output.objective,
        output.residual,
        output.converged,
        path.display()
    );
    Ok(if output.converged { 0 } else { 1 })
}

#[derive(Serialize)]
struct SimulateOutput {
    model: String,
    version: String,
    horizon: f64,
    dt: f64,
    eps: Option<f64>,
    delta: Option<f64>,
    p: Option<u8>,
    estimate: MCEstimate,
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> anyhow::Result<i32> {
    let (model, dt, label) = match args.model.as_str() {
        "dirac" => {
            let t = args.t.ok_or_else(|| anyhow!("--t is required for dirac"))?;
            let dt = args.dt.unwrap_or_else(|| default_dt(args.eps, t));
            (
                GibbsModel::DiracMollified {
                    mollifier: MollifierSpec::gaussian(args.eps)?,
                    horizon: t,
                },
                dt,
                "dirac",
            )
        }
        "coulomb" => {
            let t = args
                .t
                .ok_or_else(|| anyhow!("--t is required for coulomb"))?;
            let dt = args.dt.unwrap_or(t / 1000.0);
            (
                GibbsModel::CoulombRegularized {
                    delta: args.delta,
                    horizon: t,
                },
                dt,
                "coulomb",
            )
        }
        "pam" => {
            let tau = args.t.unwrap_or(1.0 / (args.eps * args.eps));
            let dt = args.dt.unwrap_or_else(|| default_dt(args.eps_phi, tau));
            (
                GibbsModel::Pam {
                    p: args.p,
                    mollifier: MollifierSpec::gaussian(args.eps_phi)?,
                    horizon: tau,
                },
                dt,
                "pam",
            )
        }
        other => return Err(anyhow!("unknown model {other:?}")),
    };
    let estimate = estimate_log_partition(&model, dt, args.samples, cli.seed)?;
    let output = SimulateOutput {
        model: label.into(),
        version: occupath_core::VERSION.into(),
        horizon: model.horizon(),
        dt,
        eps: Some(args.eps),
        delta: Some(args.delta),
        p: Some(args.p),
        estimate,
    };
    let path = write_result(
        cli,
        &args.out,
        serde_json::json!({
            "command": "simulate",
            "model": label,
            "t": model.horizon(),
            "dt": dt,
            "eps": args.eps,
            "delta": args.delta,
            "p": args.p,
            "samples": args.samples,
            "seed": cli.seed,
        }),
        &output,
    )?;
    eprintln!(
        "simulate {}: value {:.6} +- {:.2e} (ess {:.0}) -> {}",
        label,
        output.estimate.value,
        output.estimate.std_error,
        output.estimate.ess,
        path.display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct MomentsOutput {
    version: String,
    p: u8,
    eps_phi: f64,
    sweep: Vec<MomentPoint>,
}

#[derive(Serialize)]
struct MomentPoint {
    eps: f64,
    estimate: MCEstimate,
}

fn cmd_moments(cli: &Cli, args: &MomentsArgs) -> anyhow::Result<i32> {
    let eps_list: Vec<f64> = args
        .eps
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("bad eps {s:?}: {e}")))
        .collect::<anyhow::Result<_>>()?;
    let spec = MollifierSpec::gaussian(args.eps_phi)?;
    let mut sweep = Vec::with_capacity(eps_list.len());
    for eps in eps_list {
        let estimate = estimate_pam_moment(
            args.p,
            eps,
            &spec,
            args.dt,
            args.samples,
            cli.seed,
            DEFAULT_STEP_BUDGET,
        )?;
        sweep.push(MomentPoint { eps, estimate });
    }
    let output = MomentsOutput {
        version: occupath_core::VERSION.into(),
        p: args.p,
        eps_phi: args.eps_phi,
        sweep,
    };
    let path = write_result(
        cli,
        &args.out,
        serde_json::json!({
            "command": "moments",
            "p": args.p,
            "eps": args.eps,
            "eps_phi": args.eps_phi,
            "samples": args.samples,
            "seed": cli.seed,
        }),
        &output,
    )?;
    eprintln!("moments -> {}", path.display());
    Ok(0)
}

fn cmd_experiment(cli: &Cli, args: &ExperimentArgs) -> anyhow::Result<i32> {
    let (value, params): (serde_json::Value, serde_json::Value) = match args.name.as_str() {
        "intermittency-ordering" => {
            let opts = experiments::IntermittencyOptions::default();
            let report = experiments::intermittency_ordering(&opts)?;
            (serde_json::to_value(&report)?, serde_json::to_value(&opts)?)
        }
        "pam-mc-vs-variational" => {
            let mut opts = experiments::PamSweepOptions {
                seed: cli.seed,
                ..Default::default()
            };
            if let Some(s) = args.samples {
                opts.samples = s;
            }
            let report = experiments::pam_mc_vs_variational(&opts)?;
            (serde_json::to_value(&report)?, serde_json::to_value(&opts)?)
        }
        "gibbs-localization" => {
            let mut opts = experiments::GibbsLocalizationOptions {
                seed: cli.seed,
                ..Default::default()
            };
            if let Some(s) = args.samples {
                opts.samples = s;
            }
            let report = experiments::gibbs_localization(&opts)?;
            (serde_json::to_value(&report)?, serde_json::to_value(&opts)?)
        }
        "footnote-convergence" => {
            let opts = experiments::MixtureConvergenceOptions::default();
            let report = experiments::mixture_convergence(&opts)?;
            (serde_json::to_value(&report)?, serde_json::to_value(&opts)?)
        }
        other => return Err(anyhow!("unknown experiment {other:?}")),
    };
    let out = PathBuf::from(format!("{}.json", args.name));
    let path = write_result(
        cli,
        &out,
        serde_json::json!({ "command": "experiment", "name": args.name, "options": params }),
        &value,
    )?;
    eprintln!("experiment {} -> {}", args.name, path.display());
    Ok(0)
}
