//! Rate-energy regions: sweeps of the secrecy target for one channel draw
//! and Monte Carlo averages over many draws.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{generate_channels_for_trial, ChannelGenSpec, ChannelSet, SchemeTag, SystemParams};
use crate::optimal::{solve_optimal, SearchConfig};
use crate::sdr::check_feasibility;
use crate::suboptimal::{scheme1, scheme1_rate_limit, scheme2, scheme2_rate_limit, Scheme2Config};

/// Slack allowed when checking that the optimal boundary never increases.
pub const MONOTONE_SLACK: f64 = 1e-6;

/// Joules to the milli-Joules written to CSV.
const MJ_PER_J: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub search: SearchConfig,
    pub scheme2: Scheme2Config,
}

/// One boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct REPoint {
    /// Secrecy target in bits/s/Hz.
    pub r_target: f64,
    /// Weighted sum-energy in Joules per slot; `None` unless feasible.
    pub energy: Option<f64>,
    pub feasible: bool,
    /// The curve this point belongs to.
    pub scheme: SchemeTag,
    /// IR SINR of the optimal design (absent for the no-secrecy shortcut
    /// and for suboptimal schemes).
    pub gamma0: Option<f64>,
    pub trial: Option<usize>,
    /// Diagnostics when the point could not be evaluated.
    pub failure: Option<String>,
}

impl REPoint {
    fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Where a region's channel came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelRef {
    File(PathBuf),
    Seeded { seed: u64, trial: u64 },
    Inline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RERegion {
    pub scheme: SchemeTag,
    /// Largest target this scheme can meet on this channel.
    pub r_max: f64,
    pub points: Vec<REPoint>,
    pub params: SystemParams,
    pub channel: ChannelRef,
    /// Largest increase of energy between consecutive feasible points
    /// (non-positive for a monotone boundary).
    pub max_increase: f64,
}

impl RERegion {
    /// Whether energy never increases with the target beyond [`MONOTONE_SLACK`].
    pub fn is_monotone(&self) -> bool {
        self.max_increase <= MONOTONE_SLACK
    }
}

fn check_scheme(scheme: SchemeTag) -> Result<()> {
    if scheme == SchemeTag::Trivial {
        return Err(Error::validation("the no-secrecy shortcut is not a sweepable scheme"));
    }
    Ok(())
}

/// Largest target the given scheme can meet.
pub fn scheme_rate_limit(params: &SystemParams, ch: &ChannelSet, scheme: SchemeTag, cfg: &ExperimentConfig) -> Result<f64> {
    check_scheme(scheme)?;
    match scheme {
        SchemeTag::Sub1 => scheme1_rate_limit(params, ch),
        SchemeTag::Sub2 => scheme2_rate_limit(params, ch, &cfg.scheme2),
        _ => Ok(check_feasibility(params, ch, &cfg.search.feasibility)?.r_max),
    }
}

/// Solves one target with one scheme, folding scheme-level infeasibility
/// into the point and keeping other errors as diagnostics.
pub fn solve_point(
    params: &SystemParams,
    ch: &ChannelSet,
    scheme: SchemeTag,
    r_target: f64,
    cfg: &ExperimentConfig,
) -> REPoint {
    let p = params.clone().with_target(r_target);
    let outcome: Result<(f64, Option<f64>)> = match scheme {
        SchemeTag::Sub1 => scheme1(&p, ch).map(|d| (d.energy, None)),
        SchemeTag::Sub2 => scheme2(&p, ch, &cfg.scheme2).map(|d| (d.energy, None)),
        _ => solve_optimal(&p, ch, &cfg.search).map(|d| (d.energy(), d.gamma0)),
    };
    let mut point = REPoint {
        r_target,
        energy: None,
        feasible: false,
        scheme,
        gamma0: None,
        trial: None,
        failure: None,
    };
    match outcome {
        Ok((e, g0)) => {
            point.energy = Some(e);
            point.feasible = true;
            point.gamma0 = g0;
        }
        Err(Error::Infeasible { .. } | Error::SchemeInfeasible { .. }) => {}
        Err(e) => point.failure = Some(e.to_string()),
    }
    point
}

/// Solves every target of `rates` with one scheme.
pub fn sweep_on_grid(
    params: &SystemParams,
    ch: &ChannelSet,
    scheme: SchemeTag,
    rates: &[f64],
    cfg: &ExperimentConfig,
) -> Result<Vec<REPoint>> {
    check_scheme(scheme)?;
    Ok(rates
        .par_iter()
        .map(|&r| solve_point(params, ch, scheme, r, cfg))
        .collect())
}

/// `n` uniformly spaced targets on `[0, r_max]`.
pub fn rate_grid(r_max: f64, n: usize) -> Vec<f64> {
    let top = r_max.max(0.0);
    (0..n)
        .map(|j| if j + 1 == n { top } else { top * j as f64 / (n - 1) as f64 })
        .collect()
}

fn max_increase(points: &[REPoint]) -> f64 {
    let energies: Vec<f64> = points.iter().filter_map(|p| p.energy).collect();
    energies
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Boundary of one scheme's rate-energy region on `n_points` targets
/// between zero and the scheme's own rate limit.
pub fn sweep_region(
    params: &SystemParams,
    ch: &ChannelSet,
    scheme: SchemeTag,
    n_points: usize,
    channel: ChannelRef,
    cfg: &ExperimentConfig,
) -> Result<RERegion> {
    check_scheme(scheme)?;
    if n_points < 2 {
        return Err(Error::validation("a region sweep needs at least two points"));
    }
    params.validate()?;
    ch.validate_for(params)?;
    let limit = match scheme_rate_limit(params, ch, scheme, cfg) {
        Ok(r) => Some(r),
        Err(e @ (Error::SchemeInapplicable { .. } | Error::DegenerateChannel(_))) => {
            log::warn!("{scheme}: {e}");
            None
        }
        Err(e) => return Err(e),
    };
    let points = match limit {
        Some(r_max) => sweep_on_grid(params, ch, scheme, &rate_grid(r_max, n_points), cfg)?,
        None => {
            // the scheme has no curve on this channel; keep the points so
            // the gap is visible
            let reason = match scheme_rate_limit(params, ch, scheme, cfg) {
                Err(e) => e.to_string(),
                Ok(_) => unreachable!(),
            };
            rate_grid(0.0, 1)
                .into_iter()
                .map(|r| REPoint {
                    r_target: r,
                    energy: None,
                    feasible: false,
                    scheme,
                    gamma0: None,
                    trial: None,
                    failure: Some(reason.clone()),
                })
                .collect()
        }
    };
    let inc = max_increase(&points);
    if scheme == SchemeTag::Optimal && inc > MONOTONE_SLACK {
        log::warn!("optimal boundary increases by {inc:e} between consecutive targets");
    }
    Ok(RERegion {
        scheme,
        r_max: limit.unwrap_or(0.0),
        points,
        params: params.clone(),
        channel,
        max_increase: inc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateAxis {
    /// Targets as fractions of each trial's largest feasible rate.
    Normalized,
    /// Targets in bits/s/Hz shared by every trial.
    Absolute,
}

/// Per-scheme average boundary on one common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub scheme: SchemeTag,
    pub axis: RateAxis,
    pub grid: Vec<f64>,
    /// Mean over trials where the point is feasible.
    pub mean_energy: Vec<Option<f64>>,
    pub median_energy: Vec<Option<f64>>,
    pub feasible: Vec<usize>,
    pub infeasible: Vec<usize>,
    pub failed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub category: String,
    pub message: String,
}

/// Points of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Random stream of the trial's channel draw.
    pub stream: u64,
    pub r_max: f64,
    /// Normalized-grid points of every scheme, scheme-major.
    pub points: Vec<REPoint>,
    /// Absolute-grid points, scheme-major.
    pub absolute_points: Vec<REPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub n_trials: usize,
    pub seed: u64,
    pub schemes: Vec<SchemeTag>,
    pub curves: Vec<CurveSummary>,
    /// Successful trials in trial order.
    pub trials: Vec<TrialRecord>,
    /// Quarantined trials.
    pub failures: Vec<TrialFailure>,
    /// Quarantined trials and failed points by category.
    pub failure_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonteCarloConfig {
    pub n_trials: usize,
    pub n_points: usize,
    /// Also evaluate a grid in absolute rate units, `[0, max_t r_max(t)]`.
    pub absolute_grid: bool,
    pub experiment: ExperimentConfig,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            n_trials: 50,
            n_points: 20,
            absolute_grid: true,
            experiment: ExperimentConfig::default(),
        }
    }
}

fn error_category(e: &Error) -> &'static str {
    match e {
        Error::Validation(_) => "validation",
        Error::NoConvergence { .. } => "no_convergence",
        Error::Domain { .. } => "domain",
        Error::SchemeInapplicable { .. } => "scheme_inapplicable",
        Error::SchemeInfeasible { .. } | Error::Infeasible { .. } => "infeasible",
        Error::DegenerateChannel(_) => "degenerate_channel",
        Error::Solver { .. } => "solver",
        Error::State(_) => "state",
        Error::Reconstruction { .. } => "reconstruction",
        Error::Io { .. } | Error::Parse { .. } | Error::Json(_) => "io",
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

fn summarize(
    scheme: SchemeTag,
    axis: RateAxis,
    grid: &[f64],
    n_trials: usize,
    per_trial: &[&[REPoint]],
) -> CurveSummary {
    let n = grid.len();
    let mut out = CurveSummary {
        scheme,
        axis,
        grid: grid.to_vec(),
        mean_energy: Vec::with_capacity(n),
        median_energy: Vec::with_capacity(n),
        feasible: vec![0; n],
        infeasible: vec![0; n],
        failed: vec![0; n],
    };
    for j in 0..n {
        let mut energies = Vec::new();
        for pts in per_trial {
            let p = &pts[j];
            if let Some(e) = p.energy {
                energies.push(e);
                out.feasible[j] += 1;
            } else if p.failed() {
                out.failed[j] += 1;
            } else {
                out.infeasible[j] += 1;
            }
        }
        // quarantined trials count as failures at every point
        out.failed[j] += n_trials - per_trial.len();
        let mean = (!energies.is_empty()).then(|| energies.iter().sum::<f64>() / energies.len() as f64);
        out.mean_energy.push(mean);
        out.median_energy.push(median(&mut energies));
    }
    out
}

/// Monte Carlo over seeded channel draws; trial `t` uses random stream `t`.
pub fn monte_carlo(
    params: &SystemParams,
    spec: &ChannelGenSpec,
    schemes: &[SchemeTag],
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloSummary> {
    spec.validate(params)?;
    monte_carlo_with(params, spec.seed, schemes, cfg, |t| {
        generate_channels_for_trial(params, spec, t as u64)
    })
}

/// Monte Carlo over channels from an arbitrary source. Trials whose channel
/// or rate limit cannot be obtained are quarantined with diagnostics; the
/// result does not depend on evaluation order.
pub fn monte_carlo_with<F>(
    params: &SystemParams,
    seed: u64,
    schemes: &[SchemeTag],
    cfg: &MonteCarloConfig,
    source: F,
) -> Result<MonteCarloSummary>
where
    F: Fn(usize) -> Result<ChannelSet> + Sync,
{
    params.validate()?;
    if cfg.n_trials == 0 {
        return Err(Error::validation("Monte Carlo needs at least one trial"));
    }
    if cfg.n_points < 2 {
        return Err(Error::validation("Monte Carlo needs at least two grid points"));
    }
    if schemes.is_empty() {
        return Err(Error::validation("no scheme selected"));
    }
    for &s in schemes {
        check_scheme(s)?;
    }
    let xcfg = &cfg.experiment;

    // stage 1: channels and rate limits
    let stage1: Vec<std::result::Result<(ChannelSet, f64), TrialFailure>> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| {
            let quarantine = |e: Error| TrialFailure {
                trial: t,
                category: error_category(&e).to_string(),
                message: e.to_string(),
            };
            let ch = source(t).map_err(quarantine)?;
            ch.validate_for(params).map_err(quarantine)?;
            let r_max = check_feasibility(params, &ch, &xcfg.search.feasibility)
                .map_err(quarantine)?
                .r_max;
            Ok((ch, r_max))
        })
        .collect();

    let fractions = rate_grid(1.0, cfg.n_points);
    let abs_top = stage1
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|(_, r)| *r))
        .fold(0.0, f64::max);
    let abs_grid = if cfg.absolute_grid {
        rate_grid(abs_top, cfg.n_points)
    } else {
        Vec::new()
    };

    // stage 2: every (trial, scheme, point), in a fixed order
    let ok: Vec<(usize, &ChannelSet, f64)> = stage1
        .iter()
        .enumerate()
        .filter_map(|(t, r)| r.as_ref().ok().map(|(ch, r)| (t, ch, *r)))
        .collect();
    let trials: Vec<TrialRecord> = ok
        .par_iter()
        .map(|&(t, ch, r_max)| {
            let eval = |rates: &[f64]| -> Vec<REPoint> {
                schemes
                    .iter()
                    .flat_map(|&s| {
                        rates.iter().map(move |&r| {
                            let mut p = if r <= r_max {
                                solve_point(params, ch, s, r, xcfg)
                            } else {
                                REPoint {
                                    r_target: r,
                                    energy: None,
                                    feasible: false,
                                    scheme: s,
                                    gamma0: None,
                                    trial: None,
                                    failure: None,
                                }
                            };
                            p.trial = Some(t);
                            p
                        })
                    })
                    .collect()
            };
            let rates: Vec<f64> = fractions.iter().map(|f| f * r_max).collect();
            TrialRecord {
                trial: t,
                stream: t as u64,
                r_max,
                points: eval(&rates),
                absolute_points: eval(&abs_grid),
            }
        })
        .collect();

    let failures: Vec<TrialFailure> = stage1.into_iter().filter_map(|r| r.err()).collect();
    let mut failure_counts = BTreeMap::new();
    for f in &failures {
        *failure_counts.entry(f.category.clone()).or_insert(0) += 1;
    }
    for rec in &trials {
        for p in rec.points.iter().chain(&rec.absolute_points) {
            if p.failed() {
                *failure_counts.entry("point".to_string()).or_insert(0) += 1;
            }
        }
    }

    let mut curves = Vec::new();
    for (si, &scheme) in schemes.iter().enumerate() {
        let n = cfg.n_points;
        let per: Vec<&[REPoint]> = trials.iter().map(|r| &r.points[si * n..(si + 1) * n]).collect();
        curves.push(summarize(scheme, RateAxis::Normalized, &fractions, cfg.n_trials, &per));
        if cfg.absolute_grid {
            let per: Vec<&[REPoint]> = trials
                .iter()
                .map(|r| &r.absolute_points[si * n..(si + 1) * n])
                .collect();
            curves.push(summarize(scheme, RateAxis::Absolute, &abs_grid, cfg.n_trials, &per));
        }
    }

    Ok(MonteCarloSummary {
        n_trials: cfg.n_trials,
        seed,
        schemes: schemes.to_vec(),
        curves,
        trials,
        failures,
        failure_counts,
    })
}

impl MonteCarloSummary {
    pub fn curve(&self, scheme: SchemeTag, axis: RateAxis) -> Option<&CurveSummary> {
        self.curves.iter().find(|c| c.scheme == scheme && c.axis == axis)
    }

    /// Every normalized-grid point of every trial, in trial order.
    pub fn points(&self) -> Vec<REPoint> {
        self.trials.iter().flat_map(|t| t.points.iter().cloned()).collect()
    }
}

pub const CSV_HEADER: &str = "r_target_bpshz,energy_mj_per_slot,feasible,scheme,gamma0,trial";

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Region CSV text: header, then one row per point; rates are clipped at
/// zero, energy is in mJ per slot, missing values are empty.
pub fn region_csv<'a>(points: impl IntoIterator<Item = &'a REPoint>) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_num(p.r_target.max(0.0)),
            p.energy.map(|e| fmt_num(e * MJ_PER_J)).unwrap_or_default(),
            p.feasible,
            p.scheme,
            p.gamma0.map(fmt_num).unwrap_or_default(),
            p.trial.map(|t| t.to_string()).unwrap_or_default(),
        );
    }
    out
}

pub fn emit_region_csv<'a>(points: impl IntoIterator<Item = &'a REPoint>, dest: &Path) -> Result<()> {
    std::fs::write(dest, region_csv(points)).map_err(|e| Error::io(dest, e))
}

/// Parses region CSV text back into points (energy converted to Joules).
pub fn parse_region_csv(text: &str) -> Result<Vec<REPoint>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::validation("missing or unexpected CSV header"));
    }
    let bad = |line: &str| Error::validation(format!("malformed CSV row: {line}"));
    lines
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(bad(line));
            }
            let num = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(line))
                }
            };
            let scheme = match cols[3] {
                "optimal" => SchemeTag::Optimal,
                "sub1" => SchemeTag::Sub1,
                "sub2" => SchemeTag::Sub2,
                "trivial" => SchemeTag::Trivial,
                _ => return Err(bad(line)),
            };
            Ok(REPoint {
                r_target: num(cols[0])?.ok_or_else(|| bad(line))?,
                energy: num(cols[1])?.map(|e| e / MJ_PER_J),
                feasible: cols[2].parse().map_err(|_| bad(line))?,
                scheme,
                gamma0: num(cols[4])?,
                trial: if cols[5].is_empty() {
                    None
                } else {
                    Some(cols[5].parse().map_err(|_| bad(line))?)
                },
                failure: None,
            })
        })
        .collect()
}
