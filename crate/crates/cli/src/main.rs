//! `nlbs` command-line front end.
//!
//! Every command writes its result to `--out` and a `<out>.meta.json` sidecar
//! holding the full argument set, seed and tool version.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nlbs::analysis::{
    experiment_tvd_vs_bunching, haar_cumulative_study, haar_truncation_study, prepare_gadgets, random_linear_search,
    summarize, tvd, Reference, TvdBunchingConfig,
};
use nlbs::gadget::{default_p_th, optimize_gadget, published_gadget, published_tolerance, verify_gadget, Budget, GadgetSpec};
use nlbs::io::{read_matrix, records_csv, samples_csv, write_matrix, ExperimentConfig, Metadata};
use nlbs::linalg::permanent;
use nlbs::linear_bs::output_distribution;
use nlbs::nonlinear_bs::{nl_distribution, NonlinearExperiment};
use nlbs::rng::seeded;
use nlbs::sim::{build_setup, postselected_distribution, run_algorithm1, DEFAULT_MAX_TRIALS, DEFAULT_MIN_TRIALS};
use nlbs::{Error, FockState, Result};

#[derive(Parser)]
#[command(name = "nlbs", version, about = "Non-linear Boson Sampling toolkit")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Permanent of a matrix.
    Permanent(PermanentArgs),
    /// Linear output distribution of a unitary.
    Distribution(DistributionArgs),
    /// Output distribution of a single-mode non-linear experiment.
    NonlinearDistribution(NonlinearArgs),
    /// Gadget synthesis and verification.
    #[command(subcommand)]
    Gadget(GadgetCommand),
    /// Post-selected sampling with a gadget.
    Simulate(SimulateArgs),
    /// Parametric experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Haar-ensemble studies.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Subcommand)]
enum GadgetCommand {
    Optimize(OptimizeArgs),
    Verify(VerifyArgs),
    /// Write a published gadget matrix as gadget JSON.
    ExportPublished(ExportArgs),
}

#[derive(Subcommand)]
enum ExperimentCommand {
    TvdBunching(TvdBunchingArgs),
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    Cumulative(CumulativeArgs),
    Truncation(TruncationArgs),
    LinearSearch(LinearSearchArgs),
}

#[derive(Args, Serialize)]
struct PermanentArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct DistributionArgs {
    #[arg(long)]
    unitary: PathBuf,
    /// Occupation list, e.g. 1,1,0.
    #[arg(long)]
    input: FockState,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct NonlinearArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    mode_x: Option<usize>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct OptimizeArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    phi: f64,
    /// Success-probability threshold; defaults depend on k.
    #[arg(long)]
    p_th: Option<f64>,
    #[arg(long, default_value_t = 100)]
    starts: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    gadget: PathBuf,
    /// Phase to check against; defaults to the gadget's own.
    #[arg(long)]
    phi: Option<f64>,
    /// Largest accepted residual modulus.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Optional report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ExportArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Gadget JSON; falls back to the config's gadget path.
    #[arg(long)]
    gadget: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Summary JSON path; defaults to `<out>.summary.json`.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ReferenceArg {
    Gadget,
    PathSum,
}

#[derive(Args, Serialize)]
struct TvdBunchingArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 9, 16, 27])]
    modes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2])]
    k: Vec<usize>,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    phi: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ReferenceArg::Gadget)]
    reference: ReferenceArg,
    #[arg(long, default_value_t = 20)]
    gadget_starts: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct CumulativeArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 9)]
    m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.95, 0.99])]
    thresholds: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    units: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct TruncationArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 9)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    n_max: usize,
    #[arg(long, default_value_t = 1000)]
    units: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct LinearSearchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn write_output(out: &Path, body: &str, command: &str, seed: Option<u64>, args: &impl Serialize) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(out, body)?;
    Metadata::new(command, seed, serde_json::to_value(args)?).write_for(out)
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_json(&std::fs::read_to_string(path)?)
}

fn read_gadget(path: &Path) -> Result<GadgetSpec> {
    GadgetSpec::from_json(&std::fs::read_to_string(path)?)
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Permanent(a) => {
            let p = permanent(&read_matrix(&a.matrix)?)?;
            println!("{} {:+}i", p.re, p.im);
            let body = json(&serde_json::json!({ "permanent": [p.re, p.im] }))?;
            write_output(&a.out, &body, "permanent", None, &a)
        }
        Command::Distribution(a) => {
            let d = output_distribution(&read_matrix(&a.unitary)?, &a.input)?;
            write_output(&a.out, &d.to_csv(), "distribution", None, &a)
        }
        Command::NonlinearDistribution(a) => {
            let r = read_config(&a.config)?.resolve()?;
            let x = a.mode_x.unwrap_or(r.x);
            let phi = a.phi.unwrap_or(r.phi);
            let d = nl_distribution(&NonlinearExperiment::single_mode(r.w, r.v, x, phi, r.input)?)?;
            write_output(&a.out, &d.to_csv(), "nonlinear-distribution", None, &a)
        }
        Command::Gadget(GadgetCommand::Optimize(a)) => {
            let p_th = a.p_th.unwrap_or_else(|| default_p_th(a.k));
            let g = optimize_gadget(a.k, a.phi, p_th, a.starts, &mut seeded(a.seed), Budget::default())?;
            println!("k={} phi={} success_prob={:.6} residual={:.3e}", g.k, g.phi, g.success_prob, g.residual);
            write_output(&a.out, &(g.to_json()? + "\n"), "gadget optimize", Some(a.seed), &a)
        }
        Command::Gadget(GadgetCommand::Verify(a)) => {
            let g = read_gadget(&a.gadget)?;
            let phi = a.phi.unwrap_or(g.phi);
            let (residual, success_prob) = verify_gadget(&g.u_eff, phi)?;
            let deviation = g.u_eff.unitarity_deviation();
            println!(
                "k={} phi={phi} max_residual={residual:.3e} success_prob={success_prob:.6} unitarity_deviation={deviation:.3e}",
                g.k
            );
            if let Some(out) = &a.out {
                let body = json(&serde_json::json!({
                    "k": g.k, "phi": phi, "max_residual": residual,
                    "success_prob": success_prob, "unitarity_deviation": deviation,
                    "passed": residual <= a.tol,
                }))?;
                write_output(out, &body, "gadget verify", None, &a)?;
            }
            if residual > a.tol {
                return Err(Error::Invalid(format!("max residual {residual:.3e} exceeds tolerance {:.1e}", a.tol)));
            }
            Ok(())
        }
        Command::Gadget(GadgetCommand::ExportPublished(a)) => {
            let g = published_gadget(a.k)?;
            println!(
                "k={} success_prob={:.6} unitarity tolerance {:.0e}",
                g.k,
                g.success_prob,
                published_tolerance(a.k)
            );
            write_output(&a.out, &(g.to_json()? + "\n"), "gadget export-published", None, &a)
        }
        Command::Simulate(a) => {
            let cfg = read_config(&a.config)?;
            let gadget_path = a
                .gadget
                .clone()
                .or_else(|| cfg.gadget.clone())
                .ok_or_else(|| Error::Invalid("no gadget given".into()))?;
            let g = read_gadget(&gadget_path)?;
            let r = cfg.resolve()?;
            let setup = build_setup(&r.w, &r.v, r.x, &r.input, &g)?;
            let (_, p_ps) = postselected_distribution(&setup)?;
            let exact = nl_distribution(&NonlinearExperiment::single_mode(r.w, r.v, r.x, r.phi, r.input)?)?;
            let run = run_algorithm1(&setup, a.samples, &mut seeded(a.seed), DEFAULT_MIN_TRIALS, DEFAULT_MAX_TRIALS)?;
            let empirical = nlbs::Distribution::empirical(exact.space().clone(), &run.samples)?;
            let summary = serde_json::json!({
                "p_postselect": p_ps,
                "tvd_vs_exact": tvd(&empirical, &exact)?,
                "n_samples": run.samples.len(),
                "acceptance_rate": run.acceptance_rate(),
                "total_trials": run.total_trials,
            });
            write_output(&a.out, &samples_csv(&run.samples, &run.trials_per_sample), "simulate", Some(a.seed), &a)?;
            let summary_path = a.summary.clone().unwrap_or_else(|| with_suffix(&a.out, ".summary.json"));
            write_output(&summary_path, &json(&summary)?, "simulate", Some(a.seed), &a)
        }
        Command::Experiment(ExperimentCommand::TvdBunching(a)) => {
            let cfg = TvdBunchingConfig {
                n: a.n,
                modes: a.modes.clone(),
                ks: a.k.clone(),
                phi: a.phi,
                trials: a.trials,
                seed: a.seed,
                reference: match a.reference {
                    ReferenceArg::Gadget => Reference::Gadget,
                    ReferenceArg::PathSum => Reference::PathSum,
                },
                gadget_starts: a.gadget_starts,
            };
            cfg.validate()?;
            let gadgets = prepare_gadgets(&cfg)?;
            let records = experiment_tvd_vs_bunching(&cfg, &gadgets)?;
            write_output(&a.out, &records_csv(&records), "experiment tvd-bunching", Some(a.seed), &a)?;
            let summary = serde_json::json!({
                "groups": summarize(&records),
                "bunching_global_distribution": "intermediate",
            });
            write_output(&with_suffix(&a.out, ".summary.json"), &json(&summary)?, "experiment tvd-bunching", Some(a.seed), &a)
        }
        Command::Analyze(AnalyzeCommand::Cumulative(a)) => {
            let stats = haar_cumulative_study(a.n, a.m, &a.thresholds, a.units, &mut seeded(a.seed))?;
            let rows: Vec<_> = a
                .thresholds
                .iter()
                .zip(&stats)
                .map(|(t, s)| serde_json::json!({ "threshold": t, "fraction_mean": s.mean, "fraction_std": s.std }))
                .collect();
            write_output(&a.out, &json(&rows)?, "analyze cumulative", Some(a.seed), &a)
        }
        Command::Analyze(AnalyzeCommand::Truncation(a)) => {
            let s = haar_truncation_study(a.n, a.m, a.n_max, a.units, &mut seeded(a.seed))?;
            write_output(&a.out, &json(&s)?, "analyze truncation", Some(a.seed), &a)
        }
        Command::Analyze(AnalyzeCommand::LinearSearch(a)) => {
            let r = read_config(&a.config)?.resolve()?;
            let exp = NonlinearExperiment::single_mode(r.w.clone(), r.v.clone(), r.x, r.phi, r.input.clone())?;
            let res = random_linear_search(&exp, a.iterations, &mut seeded(a.seed))?;
            let target = nl_distribution(&exp)?;
            let ubar_tvd = tvd(
                &output_distribution(&nlbs::nonlinear_bs::ubar(&r.w, r.x, r.phi, &r.v)?, &r.input)?,
                &target,
            )?;
            let best_path = with_suffix(&a.out, ".best_unitary.json");
            write_matrix(&best_path, &res.best_unitary)?;
            let body = json(&serde_json::json!({
                "best_tvd": res.best_tvd,
                "ubar_tvd": ubar_tvd,
                "iterations": a.iterations,
                "best_unitary": best_path,
            }))?;
            write_output(&a.out, &body, "analyze linear-search", Some(a.seed), &a)
        }
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.workers.max(1)).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
