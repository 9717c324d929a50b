//! Command-line front end. The binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 success, 2 infeasible secrecy target, 1 any other error.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{
    monte_carlo, region_csv, scheme_rate_limit, sweep_region, ChannelRef, MonteCarloConfig, RERegion,
};
use crate::model::{ChannelSet, SchemeTag, SystemParams};
use crate::optimal::solve_optimal;
use crate::sdr::check_feasibility;
use crate::suboptimal::{scheme1, scheme2};

#[derive(Debug, Parser)]
#[command(name = "swipt", version, about = "Secrecy-constrained SWIPT beamforming designs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design beamformers for one secrecy target and write them as JSON.
    Solve,
    /// Sweep the secrecy target and write the rate-energy boundary as CSV.
    Region,
    /// Average rate-energy boundaries over random channel draws.
    Montecarlo,
    /// Report the largest feasible secrecy rate and the verdict for the target.
    Feasibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Optimal,
    Sub1,
    Sub2,
    All,
}

impl SchemeArg {
    pub fn schemes(self) -> Vec<SchemeTag> {
        match self {
            SchemeArg::Optimal => vec![SchemeTag::Optimal],
            SchemeArg::Sub1 => vec![SchemeTag::Sub1],
            SchemeArg::Sub2 => vec![SchemeTag::Sub2],
            SchemeArg::All => vec![SchemeTag::Optimal, SchemeTag::Sub1, SchemeTag::Sub2],
        }
    }
}

/// Flags shared by every subcommand; they override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file (defaults to the reference setup).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Channel JSON file; replaces random channel generation.
    #[arg(long, global = true)]
    pub channels: Option<PathBuf>,
    /// Seed of the random channel draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when omitted, except for montecarlo).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Design scheme(s) [default: optimal for solve, all otherwise].
    #[arg(long, global = true, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Secrecy target in bits/s/Hz.
    #[arg(long, global = true)]
    pub rate: Option<f64>,
    /// Points of the rate grid.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Monte Carlo trials.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Error = 1,
    Infeasible = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Loads the config file (or defaults) and applies flag overrides.
pub fn resolve_config(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::read(path)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &args.channels {
        cfg.channels.file = Some(path.clone());
        cfg.channels.generation = None;
    }
    if let Some(seed) = args.seed {
        match cfg.channels.generation.as_mut() {
            Some(g) => g.seed = seed,
            None => return Err(Error::validation("--seed needs generated channels, not a channel file")),
        }
    }
    if let Some(r) = args.rate {
        cfg.system.secrecy_target = r;
    }
    if let Some(n) = args.points {
        cfg.points = n;
        cfg.montecarlo.points = n;
    }
    if let Some(n) = args.trials {
        cfg.montecarlo.trials = n;
    }
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn provenance(command: &str, cfg: &RunConfig, params: &SystemParams) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": cfg.seed(),
        "config": cfg,
        "resolved_system": params,
    })
}

fn channel_json(ch: &ChannelSet) -> Result<Value> {
    Ok(serde_json::from_str(&ch.to_json()?)?)
}

fn write_text(dest: Option<&Path>, text: &str) -> Result<()> {
    match dest {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn write_json(dest: Option<&Path>, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dest, &text)
}

/// `region.csv` -> `region.<suffix>`
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

fn channel_ref(cfg: &RunConfig) -> ChannelRef {
    match (&cfg.channels.file, cfg.seed()) {
        (Some(path), _) => ChannelRef::File(path.clone()),
        (None, Some(seed)) => ChannelRef::Seeded { seed, trial: 0 },
        (None, None) => ChannelRef::Inline,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Outcome {
    Ok,
    Infeasible,
    Inapplicable,
    Error,
}

fn solve_one(params: &SystemParams, ch: &ChannelSet, scheme: SchemeTag, cfg: &RunConfig) -> Result<(Outcome, Value)> {
    let xcfg = cfg.experiment()?;
    let result: Result<Value> = match scheme {
        SchemeTag::Sub1 => scheme1(params, ch).map(|d| {
            json!({
                "scheme": "sub1",
                "status": "ok",
                "beams": d.beams,
                "metrics": d.metrics,
                "energy": d.energy,
                "p0": d.p0,
                "psi_tilde": d.stage.psi_tilde,
            })
        }),
        SchemeTag::Sub2 => scheme2(params, ch, &xcfg.scheme2).map(|d| {
            json!({
                "scheme": "sub2",
                "status": "ok",
                "beams": d.beams,
                "metrics": d.metrics,
                "energy": d.energy,
                "p0": d.p0,
                "p0_min": d.p0_min,
                "p0_max": d.p0_max,
                "branch": d.branch,
                "disconnected": d.disconnected,
                "psi_tilde": d.stage.psi_tilde,
            })
        }),
        _ => solve_optimal(params, ch, &xcfg.search).map(|d| {
            json!({
                "scheme": "optimal",
                "status": "ok",
                "design": d.beams.scheme,
                "beams": d.beams,
                "metrics": d.metrics,
                "energy": d.energy(),
                "gamma0": d.gamma0,
                "trivial_case": d.trivial,
                "gamma0_search": d.trace,
                "q_rank": d.q_rank,
                "q_rank_bound_holds": d.q_rank_bound_holds,
                "rank_reduction": d.reduction.as_ref().map(|r| json!({
                    "method": r.method,
                    "null_dim": r.null_dim,
                    "s_eigenvalues": r.s_eigenvalues,
                })),
            })
        }),
    };
    Ok(match result {
        Ok(v) => (Outcome::Ok, v),
        Err(Error::Infeasible { target, r_max }) => {
            eprintln!("{scheme}: secrecy target {target} bits/s/Hz is infeasible; largest feasible rate is {r_max}");
            (
                Outcome::Infeasible,
                json!({"scheme": scheme, "status": "infeasible", "target": target, "r_max": r_max}),
            )
        }
        Err(e @ Error::SchemeInfeasible { .. }) => {
            let r_max = scheme_rate_limit(params, ch, scheme, &xcfg).ok();
            eprintln!("{e}; largest rate of this scheme is {r_max:?}");
            (
                Outcome::Infeasible,
                json!({"scheme": scheme, "status": "infeasible", "target": params.secrecy_target,
                       "r_max": r_max, "message": e.to_string()}),
            )
        }
        Err(e @ Error::SchemeInapplicable { .. }) => {
            eprintln!("{e}");
            (
                Outcome::Inapplicable,
                json!({"scheme": scheme, "status": "inapplicable", "message": e.to_string()}),
            )
        }
        Err(e) => {
            eprintln!("{scheme}: {e}");
            (Outcome::Error, json!({"scheme": scheme, "status": "error", "message": e.to_string()}))
        }
    })
}

/// `solve`: one design per requested scheme.
///
/// Exit status is 1 if any scheme errored (or the single requested scheme
/// is inapplicable), otherwise 2 if any scheme missed the target, else 0.
pub fn cmd_solve(cfg: &RunConfig, schemes: &[SchemeTag]) -> Result<ExitStatus> {
    let params = cfg.system_params()?;
    let ch = cfg.channels(&params)?;
    let mut worst = Outcome::Ok;
    let mut results = Vec::new();
    for &s in schemes {
        let (outcome, v) = solve_one(&params, &ch, s, cfg)?;
        worst = worst.max(outcome);
        results.push(v);
    }
    let doc = json!({
        "provenance": provenance("solve", cfg, &params),
        "target": params.secrecy_target,
        "channels": channel_json(&ch)?,
        "results": results,
    });
    write_json(cfg.output.path.as_deref(), &doc)?;
    Ok(match worst {
        Outcome::Ok => ExitStatus::Success,
        Outcome::Infeasible => ExitStatus::Infeasible,
        Outcome::Inapplicable if schemes.len() > 1 => ExitStatus::Infeasible,
        _ => ExitStatus::Error,
    })
}

/// `region`: one CSV with every requested scheme's boundary; with `--out`
/// a `.meta.json` sidecar records provenance, rate limits and failures.
pub fn cmd_region(cfg: &RunConfig, schemes: &[SchemeTag]) -> Result<ExitStatus> {
    let params = cfg.system_params()?;
    let ch = cfg.channels(&params)?;
    let xcfg = cfg.experiment()?;
    let regions: Vec<RERegion> = schemes
        .iter()
        .map(|&s| sweep_region(&params, &ch, s, cfg.points, channel_ref(cfg), &xcfg))
        .collect::<Result<_>>()?;
    let csv = region_csv(regions.iter().flat_map(|r| &r.points));
    let out = cfg.output.path.as_deref();
    write_text(out, &csv)?;
    if let Some(path) = out {
        let curves: Vec<Value> = regions
            .iter()
            .map(|r| {
                json!({
                    "scheme": r.scheme,
                    "r_max": r.r_max,
                    "points": r.points.len(),
                    "max_increase": r.max_increase,
                    "monotone": r.is_monotone(),
                    "failures": r.points.iter().filter_map(|p| p.failure.as_ref().map(|f| json!({
                        "r_target": p.r_target, "message": f
                    }))).collect::<Vec<_>>(),
                })
            })
            .collect();
        let meta = json!({
            "provenance": provenance("region", cfg, &params),
            "channels": channel_json(&ch)?,
            "csv": path.file_name().map(|n| n.to_string_lossy().into_owned()),
            "curves": curves,
        });
        write_json(Some(&sidecar(path, "meta.json")), &meta)?;
    }
    Ok(ExitStatus::Success)
}

/// `montecarlo`: per-trial points as CSV at `--out` and the aggregated
/// curves with the failure ledger in a `.summary.json` sidecar.
pub fn cmd_montecarlo(cfg: &RunConfig, schemes: &[SchemeTag]) -> Result<ExitStatus> {
    let params = cfg.system_params()?;
    let spec = cfg.generation_spec()?;
    let out = cfg
        .output
        .path
        .as_deref()
        .ok_or_else(|| Error::validation("montecarlo needs --out (CSV path; the summary is written next to it)"))?;
    let mcfg = MonteCarloConfig {
        n_trials: cfg.montecarlo.trials,
        n_points: cfg.montecarlo.points,
        absolute_grid: cfg.montecarlo.absolute_grid,
        experiment: cfg.experiment()?,
    };
    let summary = monte_carlo(&params, &spec, schemes, &mcfg)?;
    for f in &summary.failures {
        eprintln!("trial {} quarantined ({}): {}", f.trial, f.category, f.message);
    }
    std::fs::write(out, region_csv(summary.points().iter())).map_err(|e| Error::io(out, e))?;
    let doc = json!({
        "provenance": provenance("montecarlo", cfg, &params),
        "csv": out.file_name().map(|n| n.to_string_lossy().into_owned()),
        "n_trials": summary.n_trials,
        "curves": summary.curves,
        "r_max": summary.trials.iter().map(|t| json!({"trial": t.trial, "stream": t.stream, "r_max": t.r_max})).collect::<Vec<_>>(),
        "failures": summary.failures,
        "failure_counts": summary.failure_counts,
    });
    write_json(Some(&sidecar(out, "summary.json")), &doc)?;
    Ok(ExitStatus::Success)
}

/// `feasibility`: prints the verdict; with `--out` also writes it as JSON.
pub fn cmd_feasibility(cfg: &RunConfig) -> Result<ExitStatus> {
    let params = cfg.system_params()?;
    let ch = cfg.channels(&params)?;
    let report = check_feasibility(&params, &ch, &cfg.experiment()?.search.feasibility)?;
    println!(
        "target {} bits/s/Hz: {} (largest feasible secrecy rate {} bits/s/Hz)",
        report.target,
        if report.feasible { "feasible" } else { "infeasible" },
        report.r_max
    );
    if let Some(path) = cfg.output.path.as_deref() {
        let doc = json!({
            "provenance": provenance("feasibility", cfg, &params),
            "channels": channel_json(&ch)?,
            "report": report,
        });
        write_json(Some(path), &doc)?;
    }
    Ok(if report.feasible {
        ExitStatus::Success
    } else {
        ExitStatus::Infeasible
    })
}

pub fn run(cli: &Cli) -> Result<ExitStatus> {
    let cfg = resolve_config(&cli.common)?;
    let default = match cli.command {
        Command::Solve => SchemeArg::Optimal,
        _ => SchemeArg::All,
    };
    let schemes = cli.common.scheme.unwrap_or(default).schemes();
    match cli.command {
        Command::Solve => cmd_solve(&cfg, &schemes),
        Command::Region => cmd_region(&cfg, &schemes),
        Command::Montecarlo => cmd_montecarlo(&cfg, &schemes),
        Command::Feasibility => cmd_feasibility(&cfg),
    }
}

/// Parses arguments, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Error.code() } else { 0 };
        }
    };
    match run(&cli) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::Error.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("swipt").chain(list.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config() {
        let cli = args(&["region", "--seed", "7", "--rate", "1.5", "--points", "9", "--trials", "4"]);
        let cfg = resolve_config(&cli.common).unwrap();
        assert_eq!(cfg.seed(), Some(7));
        assert_eq!(cfg.system.secrecy_target, 1.5);
        assert_eq!(cfg.points, 9);
        assert_eq!(cfg.montecarlo.points, 9);
        assert_eq!(cfg.montecarlo.trials, 4);
    }

    #[test]
    fn channel_file_replaces_generation() {
        let cli = args(&["solve", "--channels", "h.json"]);
        let cfg = resolve_config(&cli.common).unwrap();
        assert!(cfg.channels.generation.is_none());
        let cli = args(&["solve", "--channels", "h.json", "--seed", "3"]);
        assert!(resolve_config(&cli.common).is_err());
    }

    #[test]
    fn scheme_defaults() {
        assert_eq!(SchemeArg::All.schemes().len(), 3);
        let cli = args(&["solve", "--scheme", "sub2"]);
        assert_eq!(cli.common.scheme, Some(SchemeArg::Sub2));
    }

    #[test]
    fn bad_arguments_exit_one() {
        assert_eq!(main_with_args(["swipt", "solve", "--scheme", "best"]), 1);
        assert_eq!(main_with_args(["swipt", "frobnicate"]), 1);
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar(Path::new("out/region.csv"), "meta.json"), Path::new("out/region.meta.json"));
    }
}
