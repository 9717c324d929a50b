//! The optimal design: a one-dimensional search over the IR SINR target
//! wrapped around the semidefinite relaxation, followed by a rank-one
//! reconstruction of the information covariance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_evd, nullspace, orth_complement_projector, outer, top_eigenpair, trace_product, trace_re, CMatrix, CVector, C64,
    DEFAULT_NULL_TOL,
};
use crate::model::{evaluate, BeamformingSolution, ChannelSet, Metrics, SchemeTag, SystemParams};
use crate::sdr::{
    build_instance, check_feasibility, gamma0_lower_bound, gamma0_upper_bound, kkt_matrices, solve_sdr,
    FeasibilityConfig, SdrInstance, SdrSolution, SdrStatus, SolverConfig,
};
use crate::search::{golden_max_log, log_grid};

/// Relative eigenvalue level below which a covariance counts as rank one.
pub const RANK_ONE_TOL: f64 = 1e-7;
/// Energy-beam retention threshold relative to `Tr(Q)`.
pub const BEAM_RETENTION_TOL: f64 = 1e-9;

/// The no-secrecy optimum and the largest secrecy rate it already achieves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivialCaseReport {
    /// Largest eigenvalue of `sum_k mu_k zeta g_k g_k^H`.
    pub psi: f64,
    #[serde(with = "crate::model::cvector_serde")]
    pub eta: CVector,
    /// `psi * P`, the energy with no secrecy constraint.
    pub e_max: f64,
    /// Worst-case secrecy rate of the beam `sqrt(P) eta` (may be negative).
    pub r_bar: f64,
    pub applies: bool,
}

pub fn trivial_case(params: &SystemParams, ch: &ChannelSet) -> Result<TrivialCaseReport> {
    params.validate()?;
    ch.validate_for(params)?;
    let m = params.antennas;
    let mut w = CMatrix::zeros(m, m);
    for (g, c) in ch.g.iter().zip(params.energy_coefficients()) {
        w += outer(g) * C64::from(c);
    }
    let (psi, eta) = top_eigenpair(&w)?;
    let legit = (1.0 + params.power * eta.dotc(&ch.h).norm_sqr() / params.ir_noise).log2();
    let r_bar = ch
        .g
        .iter()
        .zip(&params.er_noise)
        .map(|(g, &noise)| legit - (1.0 + params.power * eta.dotc(g).norm_sqr() / noise).log2())
        .fold(f64::INFINITY, f64::min);
    Ok(TrivialCaseReport {
        psi,
        eta,
        e_max: psi * params.power,
        r_bar,
        applies: params.secrecy_target <= r_bar.max(0.0),
    })
}

/// One evaluation of the relaxation's optimal value at a fixed IR SINR.
#[derive(Debug, Clone)]
pub struct GammaEval {
    /// Optimal value, or `-inf` when the relaxation is infeasible.
    pub value: f64,
    pub instance: SdrInstance,
    pub sdr: SdrSolution,
}

pub fn g_of_gamma(params: &SystemParams, ch: &ChannelSet, gamma0: f64, solver: &SolverConfig) -> Result<GammaEval> {
    let instance = build_instance(params, ch, gamma0)?;
    let sdr = solve_sdr(&instance, solver);
    let value = match sdr.status {
        SdrStatus::Optimal => sdr.objective,
        SdrStatus::Infeasible => f64::NEG_INFINITY,
        SdrStatus::NumericalFailure => {
            return Err(Error::Solver {
                gamma0,
                detail: format!(
                    "no convergence after {} iterations (residuals {:.2e} / {:.2e}, gap {:.2e})",
                    sdr.iterations, sdr.kkt.solver_primal, sdr.kkt.solver_dual, sdr.kkt.solver_gap
                ),
            })
        }
    };
    Ok(GammaEval { value, instance, sdr })
}

/// How the rank-one information covariance was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMethod {
    /// `S` was already rank one.
    PassThrough,
    /// Components in the null space of `D*` were moved to `Q`.
    NullSpace,
    /// `S_bar = S H S / Tr(H S)` (used when the relaxation is degenerate
    /// and the null-space projection leaves more than one direction).
    Direct,
}

/// Rank-one information covariance together with the covariance that
/// absorbs the stripped components.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReduction {
    pub method: ReductionMethod,
    pub s_bar: CMatrix,
    pub q_bar: CMatrix,
    pub tau: CVector,
    pub b: f64,
    /// `pi_n^H S pi_n` for each null-space direction of `D*`.
    pub a: Vec<f64>,
    pub null_dim: usize,
    /// Eigenvalues of the information covariance before the final
    /// rank-one truncation.
    pub s_eigenvalues: Vec<f64>,
}

fn reconstruction_error(detail: impl Into<String>, eig: &[f64]) -> Error {
    Error::Reconstruction {
        detail: detail.into(),
        eigenvalues: eig.to_vec(),
    }
}

/// Turns an optimal relaxation solution into one with rank-one `S`.
///
/// The components of `S` lying in the null space of `D*` are moved into
/// `Q`, which changes neither the objective nor the total power. If `S` is
/// already rank one within [`RANK_ONE_TOL`] the projection is skipped. In
/// both cases the sub-tolerance remainder below the leading eigenpair is
/// moved to `Q` as well, so `S_bar = b tau tau^H` holds exactly.
///
/// When the relaxation is degenerate (several optimal `S`, e.g. channels
/// orthogonal to `h`) the projection can leave a higher rank; then
/// `S_bar = S H S / Tr(H S)` is used. It keeps `Tr(H S)`, the remainder
/// `S - S_bar` is positive semidefinite and invisible to the information
/// receiver, and moving it into `Q` can only lower the eavesdropper SINRs.
pub fn rank_reduce(inst: &SdrInstance, sol: &SdrSolution, null_tol: f64) -> Result<RankReduction> {
    let mats = kkt_matrices(inst, sol)?;
    let evd = hermitian_evd(&sol.s)?;
    let already_rank_one = evd.values[0] > 0.0 && evd.values.get(1).is_none_or(|&v| v <= RANK_ONE_TOL * evd.values[0]);

    let (projected, a, null_dim) = if already_rank_one {
        (sol.s.clone(), Vec::new(), 0)
    } else {
        let pi = nullspace(&mats.d_star, null_tol)?;
        let a = pi
            .basis
            .column_iter()
            .map(|p| p.dotc(&(&sol.s * p)).re)
            .collect::<Vec<_>>();
        let proj = orth_complement_projector(&pi);
        let s = &proj * &sol.s * &proj;
        ((&s + s.adjoint()) * C64::from(0.5), a, pi.dim())
    };
    let mut method = if already_rank_one {
        ReductionMethod::PassThrough
    } else {
        ReductionMethod::NullSpace
    };
    let mut pevd = hermitian_evd(&projected)?;
    if !pevd.values[0].is_finite()
        || !(pevd.values[0] > 0.0)
        || pevd.values.get(1).is_some_and(|&v| v > RANK_ONE_TOL * pevd.values[0])
    {
        let signal = trace_product(&inst.h, &sol.s);
        if !(signal > 0.0) {
            return Err(reconstruction_error(
                format!("information covariance carries no signal (null space dimension {null_dim})"),
                &evd.values,
            ));
        }
        let direct = &sol.s * &inst.h * &sol.s * C64::from(1.0 / signal);
        pevd = hermitian_evd(&((&direct + direct.adjoint()) * C64::from(0.5)))?;
        method = ReductionMethod::Direct;
    }
    let top = pevd.values[0];
    let tau = pevd.vectors.column(0).into_owned();
    let s_bar = outer(&tau) * C64::from(top);
    let moved = &sol.s - &s_bar;
    let q_bar = &sol.q + (&moved + moved.adjoint()) * C64::from(0.5);

    // post-checks
    let before = inst.objective(&sol.s, &sol.q);
    let after = inst.objective(&s_bar, &q_bar);
    if (after - before).abs() > 1e-9 * before.abs().max(f64::MIN_POSITIVE) {
        return Err(reconstruction_error(
            format!("objective changed from {before:e} to {after:e}"),
            &pevd.values,
        ));
    }
    let tr_before = trace_re(&sol.s) + trace_re(&sol.q);
    let tr_after = trace_re(&s_bar) + trace_re(&q_bar);
    if (tr_after - tr_before).abs() > 1e-9 * tr_before.abs().max(1e-300) {
        return Err(reconstruction_error(
            format!("total power changed from {tr_before:e} to {tr_after:e}"),
            &pevd.values,
        ));
    }
    let worst = inst
        .constraint_slacks(&s_bar, &q_bar)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if worst < -1e-7 {
        return Err(reconstruction_error(
            format!("reconstructed point violates a constraint by {:e}", -worst),
            &pevd.values,
        ));
    }
    let qmin = hermitian_evd(&q_bar)?.values.last().copied().unwrap_or(0.0);
    if qmin < -1e-8 * tr_before.max(1e-300) {
        return Err(reconstruction_error(
            format!("energy covariance lost positive semidefiniteness ({qmin:e})"),
            &pevd.values,
        ));
    }
    Ok(RankReduction {
        method,
        s_bar,
        q_bar,
        tau,
        b: top,
        a,
        null_dim,
        s_eigenvalues: evd.values,
    })
}

/// Beams from a rank-reduced solution: `v0 = sqrt(b) tau` and one energy
/// beam per significant eigenpair of `Q_bar`.
pub fn extract_beams(red: &RankReduction, params: &SystemParams) -> Result<BeamformingSolution> {
    let v0 = &red.tau * C64::from(red.b.sqrt());
    let q = hermitian_evd(&red.q_bar)?;
    let tr = trace_re(&red.q_bar);
    let w = q
        .values
        .iter()
        .zip(q.vectors.column_iter())
        .filter(|(&v, _)| tr > 0.0 && v > BEAM_RETENTION_TOL * tr)
        .map(|(&v, u)| u.into_owned() * C64::from(v.sqrt()))
        .collect::<Vec<_>>();
    let beams = BeamformingSolution {
        v0,
        w,
        scheme: SchemeTag::Optimal,
    };
    if beams.w.len() > params.antennas {
        return Err(Error::State("more energy beams than antennas".into()));
    }
    Ok(beams)
}

/// Outer search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Points of the logarithmic IR-SINR grid.
    pub grid_points: usize,
    /// Golden-section stopping tolerance on the relative interval width.
    pub rel_tol: f64,
    pub max_refine_iter: usize,
    pub null_tol: f64,
    pub solver: SolverConfig,
    pub feasibility: FeasibilityConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_points: 100,
            rel_tol: 1e-4,
            max_refine_iter: 200,
            null_tol: DEFAULT_NULL_TOL,
            solver: SolverConfig::default(),
            feasibility: FeasibilityConfig::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::validation("the IR-SINR grid needs at least two points"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::validation("refinement tolerance must lie in (0, 1)"));
        }
        if !(self.null_tol > 0.0 && self.null_tol < 1.0) {
            return Err(Error::validation("null-space tolerance must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStatus {
    Optimal,
    Infeasible,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub gamma0: f64,
    /// `None` when infeasible or failed.
    pub value: Option<f64>,
    pub status: EvalStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSearchTrace {
    pub grid: Vec<GridEntry>,
    pub refinement: Vec<GridEntry>,
    pub best_gamma0: f64,
    pub best_value: f64,
    pub refinement_iterations: usize,
    /// Set when the grid found no feasible point and the feasibility
    /// probe's witness seeded the refinement instead.
    pub used_witness: bool,
}

/// Everything produced by [`solve_optimal`].
#[derive(Debug, Clone)]
pub struct OptimalDesign {
    pub beams: BeamformingSolution,
    pub metrics: Metrics,
    pub trivial: TrivialCaseReport,
    /// `None` for the trivial shortcut.
    pub trace: Option<GammaSearchTrace>,
    pub gamma0: Option<f64>,
    pub sdr: Option<SdrSolution>,
    pub instance: Option<SdrInstance>,
    pub reduction: Option<RankReduction>,
    /// Eigenvalues of the relaxation's energy covariance above
    /// [`BEAM_RETENTION_TOL`] `* Tr(Q)`, before reconstruction.
    pub q_rank: Option<usize>,
    /// Whether `q_rank <= min(K, M)`.
    pub q_rank_bound_holds: bool,
}

impl OptimalDesign {
    pub fn energy(&self) -> f64 {
        self.metrics.weighted_sum_energy
    }
}

fn classify(res: &Result<GammaEval>) -> (f64, EvalStatus) {
    match res {
        Ok(e) if e.value.is_finite() => (e.value, EvalStatus::Optimal),
        Ok(_) => (f64::NEG_INFINITY, EvalStatus::Infeasible),
        Err(_) => (f64::NEG_INFINITY, EvalStatus::Failed),
    }
}

fn entry(gamma0: f64, value: f64, status: EvalStatus) -> GridEntry {
    GridEntry {
        gamma0,
        value: value.is_finite().then_some(value),
        status,
    }
}

/// The shortcut beam `sqrt(P) eta` with no energy beams.
pub fn trivial_solution(params: &SystemParams, report: &TrivialCaseReport) -> BeamformingSolution {
    BeamformingSolution {
        v0: &report.eta * C64::from(params.power.sqrt()),
        w: Vec::new(),
        scheme: SchemeTag::Trivial,
    }
}

/// Solves the beamforming problem to global optimality (up to the density
/// of the IR-SINR search).
pub fn solve_optimal(params: &SystemParams, ch: &ChannelSet, cfg: &SearchConfig) -> Result<OptimalDesign> {
    cfg.validate()?;
    let trivial = trivial_case(params, ch)?;
    if trivial.applies {
        let beams = trivial_solution(params, &trivial);
        let metrics = evaluate(ch, &beams, params);
        return Ok(OptimalDesign {
            beams,
            metrics,
            trivial,
            trace: None,
            gamma0: None,
            sdr: None,
            instance: None,
            reduction: None,
            q_rank: None,
            q_rank_bound_holds: true,
        });
    }

    let lo = gamma0_lower_bound(params.secrecy_target);
    let hi = gamma0_upper_bound(params, ch);
    let infeasible = || -> Result<OptimalDesign> {
        let rep = check_feasibility(params, ch, &cfg.feasibility)?;
        Err(Error::Infeasible {
            target: params.secrecy_target,
            r_max: rep.r_max,
        })
    };
    if hi <= lo {
        return infeasible();
    }
    let nudge = 1e-6;
    let grid = log_grid(lo * (1.0 + nudge), hi * (1.0 - nudge), cfg.grid_points);
    let evals: Vec<(f64, EvalStatus)> = grid
        .par_iter()
        .map(|&g0| classify(&g_of_gamma(params, ch, g0, &cfg.solver)))
        .collect();
    let grid_trace: Vec<GridEntry> = grid.iter().zip(&evals).map(|(&g, &(v, s))| entry(g, v, s)).collect();

    let best_idx = evals
        .iter()
        .enumerate()
        .filter(|(_, (v, _))| v.is_finite())
        .fold(None, |acc: Option<(usize, f64)>, (i, &(v, _))| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i);

    let mut refinement = Vec::new();
    // incumbent: the best grid point, or the feasibility probe's witness
    let (incumbent, bracket, used_witness) = match best_idx {
        Some(i) => (
            g_of_gamma(params, ch, grid[i], &cfg.solver)?,
            (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]),
            false,
        ),
        None => {
            let rep = check_feasibility(params, ch, &cfg.feasibility)?;
            if !rep.feasible {
                return Err(Error::Infeasible {
                    target: params.secrecy_target,
                    r_max: rep.r_max,
                });
            }
            let w = rep.gamma0_witness.clamp(lo * (1.0 + nudge), hi * (1.0 - nudge));
            let res = g_of_gamma(params, ch, w, &cfg.solver);
            let (v, s) = classify(&res);
            refinement.push(entry(w, v, s));
            let eval = match res {
                Ok(e) if e.value.is_finite() => e,
                Ok(_) => {
                    return Err(Error::Solver {
                        gamma0: w,
                        detail: "the relaxation is infeasible at the feasibility witness".into(),
                    })
                }
                Err(e) => return Err(e),
            };
            let span = 1.0 + 1e-3;
            (eval, ((w / span).max(lo * (1.0 + nudge)), (w * span).min(hi * (1.0 - nudge))), true)
        }
    };

    let golden = golden_max_log(
        |g0| {
            let res = g_of_gamma(params, ch, g0, &cfg.solver);
            let (v, s) = classify(&res);
            refinement.push(entry(g0, v, s));
            (v, res.ok().filter(|e| e.value.is_finite()))
        },
        bracket.0,
        bracket.1,
        cfg.rel_tol,
        cfg.max_refine_iter,
    );
    let best = match golden.payload {
        Some(p) if p.value > incumbent.value => p,
        _ => incumbent,
    };
    let trace = GammaSearchTrace {
        grid: grid_trace,
        refinement,
        best_gamma0: best.instance.gamma0,
        best_value: best.value,
        refinement_iterations: golden.iterations,
        used_witness,
    };

    let q_evd = hermitian_evd(&best.sdr.q)?;
    let q_tr = trace_re(&best.sdr.q);
    let q_rank = if q_tr > 0.0 {
        q_evd.count_above(BEAM_RETENTION_TOL * q_tr)
    } else {
        0
    };
    let reduction = rank_reduce(&best.instance, &best.sdr, cfg.null_tol)?;
    let beams = extract_beams(&reduction, params)?;
    let metrics = evaluate(ch, &beams, params);
    Ok(OptimalDesign {
        beams,
        metrics,
        trivial,
        gamma0: Some(best.instance.gamma0),
        trace: Some(trace),
        sdr: Some(best.sdr),
        instance: Some(best.instance),
        reduction: Some(reduction),
        q_rank: Some(q_rank),
        q_rank_bound_holds: q_rank <= params.energy_receivers.min(params.antennas),
    })
}
