//! Semidefinite relaxation of the beamforming problem at a fixed IR SINR.
//!
//! With `S = v0 v0^H` and `Q = sum_i w_i w_i^H`, fixing the information
//! receiver's SINR target `gamma0` and dropping `rank(S) = 1` gives
//!
//! ```text
//! maximize    sum_k mu_k zeta (Tr(G_k S) + Tr(G_k Q))
//! subject to  Tr(H S) >= gamma0 (Tr(H Q) + sigma0^2)                 [lambda]
//!             Tr(G_k S) <= gamma_e (Tr(G_k Q) + sigma_k^2),  all k   [beta_k]
//!             Tr(S) + Tr(Q) <= P                                      [theta]
//!             S, Q psd
//! ```
//!
//! where `gamma_e = (1 + gamma0) / 2^r - 1` is the largest eavesdropper SINR
//! compatible with secrecy rate `r`. The eavesdropper constraint is kept in
//! multiplied-through form so that `gamma_e = 0` simply forces
//! `Tr(G_k S) <= 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_evd, outer, trace_product, CMatrix, CVector};
use crate::model::{ChannelSet, SystemParams};
use crate::sdp::{HermitianProgram, IpmSettings, IpmStatus, Row, Sense};
use crate::search::{golden_max_log, log_grid};

/// Interior-point settings for the relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Residual / relative-gap level required for an optimal status.
    pub tol: f64,
    /// Level the solver keeps refining towards once `tol` is met.
    pub refine_tol: f64,
    /// Relative gap accepted once the residuals meet `tol` and the solver
    /// stops improving (multipliers grow large near the feasibility edge).
    pub stalled_gap_tol: f64,
    pub max_iter: usize,
    /// Smallest value accepted as a strictly positive multiplier.
    pub dual_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            refine_tol: 1e-11,
            stalled_gap_tol: 1e-6,
            max_iter: 200,
            dual_floor: 1e-9,
        }
    }
}

impl SolverConfig {
    fn ipm(&self) -> IpmSettings {
        IpmSettings {
            tol: self.tol,
            refine_tol: self.refine_tol.min(self.tol),
            stalled_gap_tol: self.stalled_gap_tol.max(self.tol),
            max_iter: self.max_iter,
            ..IpmSettings::default()
        }
    }
}

/// Data of one relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct SdrInstance {
    /// `h h^H`
    pub h: CMatrix,
    /// `g_k g_k^H`
    pub g: Vec<CMatrix>,
    /// `mu_k zeta`
    pub energy_coeffs: Vec<f64>,
    pub gamma0: f64,
    pub gamma_e: f64,
    pub ir_noise: f64,
    pub er_noise: Vec<f64>,
    pub power: f64,
    /// `sum_k mu_k zeta G_k`
    pub obj_weights: CMatrix,
}

impl SdrInstance {
    /// General constructor; `gamma_e` is taken as given.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        h: &CVector,
        g: &[CVector],
        energy_coeffs: &[f64],
        gamma0: f64,
        gamma_e: f64,
        ir_noise: f64,
        er_noise: &[f64],
        power: f64,
    ) -> Result<Self> {
        let m = h.len();
        if g.is_empty() || g.iter().any(|gk| gk.len() != m) || energy_coeffs.len() != g.len() || er_noise.len() != g.len() {
            return Err(Error::validation("inconsistent relaxation dimensions"));
        }
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(Error::validation(format!("gamma0 must be positive, got {gamma0}")));
        }
        if !(gamma_e.is_finite() && gamma_e >= 0.0) {
            return Err(Error::validation(format!("gamma_e must be non-negative, got {gamma_e}")));
        }
        if !(power.is_finite() && power >= 0.0) {
            return Err(Error::validation("power budget must be non-negative"));
        }
        let hm = outer(h);
        let gm: Vec<CMatrix> = g.iter().map(outer).collect();
        let mut obj = CMatrix::zeros(m, m);
        for (gk, &c) in gm.iter().zip(energy_coeffs) {
            obj += gk * crate::linalg::C64::from(c);
        }
        Ok(Self {
            h: hm,
            g: gm,
            energy_coeffs: energy_coeffs.to_vec(),
            gamma0,
            gamma_e,
            ir_noise,
            er_noise: er_noise.to_vec(),
            power,
            obj_weights: obj,
        })
    }

    pub fn antennas(&self) -> usize {
        self.h.nrows()
    }

    /// Objective `Tr(W (S + Q))`.
    pub fn objective(&self, s: &CMatrix, q: &CMatrix) -> f64 {
        trace_product(&self.obj_weights, s) + trace_product(&self.obj_weights, q)
    }

    /// Normalized constraint slacks, nonnegative when satisfied: IR SINR,
    /// each eavesdropper SINR, then the power budget. Each slack is divided
    /// by the Frobenius norm of its coefficients times the power budget.
    pub fn constraint_slacks(&self, s: &CMatrix, q: &CMatrix) -> Vec<f64> {
        let p = if self.power > 0.0 { self.power } else { 1.0 };
        let hn = self.h.norm() * (1.0 + self.gamma0 * self.gamma0).sqrt();
        let mut out = Vec::with_capacity(self.g.len() + 2);
        out.push(
            (trace_product(&self.h, s) - self.gamma0 * (trace_product(&self.h, q) + self.ir_noise)) / (hn * p),
        );
        for (gk, &noise) in self.g.iter().zip(&self.er_noise) {
            let gn = gk.norm() * (1.0 + self.gamma_e * self.gamma_e).sqrt();
            out.push((self.gamma_e * (trace_product(gk, q) + noise) - trace_product(gk, s)) / (gn * p));
        }
        let m = self.antennas() as f64;
        out.push((self.power - crate::linalg::trace_re(s) - crate::linalg::trace_re(q)) / (p * (2.0 * m).sqrt()));
        out
    }

    fn program(&self, scale: f64) -> HermitianProgram {
        let m = self.antennas();
        let k = self.g.len();
        let id = CMatrix::identity(m, m);
        let c = |x: f64| crate::linalg::C64::from(x);
        let mut rows = Vec::with_capacity(k + 2);
        rows.push(Row {
            herm: vec![Some(self.h.clone()), Some(&self.h * c(-self.gamma0))],
            lin: vec![],
            sense: Sense::Ge,
            rhs: self.gamma0 * self.ir_noise / scale,
        });
        for (gk, &noise) in self.g.iter().zip(&self.er_noise) {
            rows.push(Row {
                herm: vec![Some(-gk), Some(gk * c(self.gamma_e))],
                lin: vec![],
                sense: Sense::Ge,
                rhs: -self.gamma_e * noise / scale,
            });
        }
        rows.push(Row {
            herm: vec![Some(id.clone()), Some(id)],
            lin: vec![],
            sense: Sense::Le,
            rhs: self.power / scale,
        });
        HermitianProgram {
            dim: m,
            blocks: 2,
            n_lin: 0,
            objective: vec![Some(self.obj_weights.clone()), Some(self.obj_weights.clone())],
            objective_lin: vec![],
            rows,
        }
    }

    fn power_scale(&self) -> f64 {
        if self.power > 0.0 {
            self.power
        } else {
            1.0
        }
    }

    /// Dense listing of the conic program handed to the interior-point
    /// solver (power-normalized and row-equilibrated).
    pub fn conic_listing(&self) -> String {
        self.program(self.power_scale()).listing()
    }
}

/// `2^r - 1`, the smallest IR SINR compatible with secrecy rate `r`.
pub fn gamma0_lower_bound(secrecy_target: f64) -> f64 {
    secrecy_target.exp2() - 1.0
}

/// Largest IR SINR reachable at all: full power matched to `h`, no interference.
pub fn gamma0_upper_bound(params: &SystemParams, ch: &ChannelSet) -> f64 {
    params.power * ch.h.norm_squared() / params.ir_noise
}

pub fn build_instance(params: &SystemParams, ch: &ChannelSet, gamma0: f64) -> Result<SdrInstance> {
    params.validate()?;
    ch.validate_for(params)?;
    let lower = gamma0_lower_bound(params.secrecy_target);
    if !(gamma0 >= lower - 1e-12 * lower.max(1.0)) {
        return Err(Error::Domain { gamma0, lower });
    }
    let gamma_e = ((1.0 + gamma0) / params.secrecy_target.exp2() - 1.0).max(0.0);
    SdrInstance::new(
        &ch.h,
        &ch.g,
        &params.energy_coefficients(),
        gamma0,
        gamma_e,
        params.ir_noise,
        &params.er_noise,
        params.power,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdrStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// Optimality certificates of a relaxation solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// Largest normalized constraint violation (0 when feasible).
    pub primal: f64,
    /// `max(0, lambda_max(A), lambda_max(B)) / ||W||_F`.
    pub dual: f64,
    /// `(|Tr(A S)| + |Tr(B Q)|) / (P ||W||_F)`.
    pub complementarity: f64,
    /// Residuals reported by the interior-point solver itself.
    pub solver_primal: f64,
    pub solver_dual: f64,
    pub solver_gap: f64,
}

/// Improving ray proving infeasibility: a nonnegative multiplier
/// combination under which the constraints cannot hold simultaneously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualRay {
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdrSolution {
    pub s: CMatrix,
    pub q: CMatrix,
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub theta: f64,
    pub objective: f64,
    pub kkt: KktResiduals,
    pub status: SdrStatus,
    pub iterations: usize,
    pub ray: Option<DualRay>,
}

impl SdrSolution {
    /// Whether both the IR-SINR and power multipliers clear `floor`.
    pub fn duals_strictly_positive(&self, floor: f64) -> bool {
        self.lambda >= floor && self.theta >= floor
    }
}

/// Lagrangian matrices of a solved relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct KktMatrices {
    /// Coefficient of `S` in the Lagrangian.
    pub a: CMatrix,
    /// Coefficient of `Q` in the Lagrangian.
    pub b: CMatrix,
    /// `W - lambda gamma0 H - sum beta_k G_k - theta I`, i.e. `A - lambda (1 + gamma0) H`.
    pub d_star: CMatrix,
}

fn lagrangian_matrices(inst: &SdrInstance, lambda: f64, beta: &[f64], theta: f64) -> KktMatrices {
    use crate::linalg::C64;
    let m = inst.antennas();
    let id = CMatrix::identity(m, m);
    let mut sum_beta = CMatrix::zeros(m, m);
    for (gk, &bk) in inst.g.iter().zip(beta) {
        sum_beta += gk * C64::from(bk);
    }
    let base = &inst.obj_weights - &id * C64::from(theta);
    let a = &base + &inst.h * C64::from(lambda) - &sum_beta;
    let b = &base - &inst.h * C64::from(lambda * inst.gamma0) + &sum_beta * C64::from(inst.gamma_e);
    let d_star = &base - &inst.h * C64::from(lambda * inst.gamma0) - &sum_beta;
    KktMatrices { a, b, d_star }
}

pub fn kkt_matrices(inst: &SdrInstance, sol: &SdrSolution) -> Result<KktMatrices> {
    if sol.status != SdrStatus::Optimal {
        return Err(Error::State(format!(
            "Lagrangian matrices need an optimal solution, status is {:?}",
            sol.status
        )));
    }
    Ok(lagrangian_matrices(inst, sol.lambda, &sol.beta, sol.theta))
}

fn kkt_residuals(inst: &SdrInstance, s: &CMatrix, q: &CMatrix, lambda: f64, beta: &[f64], theta: f64) -> KktResiduals {
    let mats = lagrangian_matrices(inst, lambda, beta, theta);
    let wn = inst.obj_weights.norm().max(f64::MIN_POSITIVE);
    let primal = inst
        .constraint_slacks(s, q)
        .iter()
        .fold(0.0f64, |acc, &sl| acc.max(-sl));
    let lmax = |m: &CMatrix| hermitian_evd(m).map(|e| e.values[0]).unwrap_or(f64::NAN);
    let dual = lmax(&mats.a).max(lmax(&mats.b)).max(0.0) / wn;
    let p = if inst.power > 0.0 { inst.power } else { 1.0 };
    let complementarity = (trace_product(&mats.a, s).abs() + trace_product(&mats.b, q).abs()) / (p * wn);
    KktResiduals {
        primal,
        dual,
        complementarity,
        solver_primal: f64::NAN,
        solver_dual: f64::NAN,
        solver_gap: f64::NAN,
    }
}

/// Solves the relaxation with the built-in interior-point method.
pub fn solve_sdr(inst: &SdrInstance, cfg: &SolverConfig) -> SdrSolution {
    let k = inst.g.len();
    let scale = inst.power_scale();
    let sol = inst.program(scale).solve(&cfg.ipm());
    let c = crate::linalg::C64::from(scale);
    let s = &sol.blocks[0] * c;
    let q = &sol.blocks[1] * c;
    let lambda = sol.duals[0];
    let beta = sol.duals[1..=k].to_vec();
    let theta = sol.duals[k + 1];
    let status = match sol.status {
        IpmStatus::Optimal => SdrStatus::Optimal,
        IpmStatus::PrimalInfeasible => SdrStatus::Infeasible,
        IpmStatus::DualInfeasible | IpmStatus::NumericalFailure => SdrStatus::NumericalFailure,
    };
    let ray = (status == SdrStatus::Infeasible).then(|| DualRay {
        lambda,
        beta: beta.clone(),
        theta,
    });
    let mut kkt = kkt_residuals(inst, &s, &q, lambda, &beta, theta);
    kkt.solver_primal = sol.primal_residual;
    kkt.solver_dual = sol.dual_residual;
    kkt.solver_gap = sol.rel_gap;
    SdrSolution {
        objective: inst.objective(&s, &q),
        s,
        q,
        lambda,
        beta,
        theta,
        kkt,
        status,
        iterations: sol.iterations,
        ray,
    }
}

/// Settings of the feasibility probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeasibilityConfig {
    /// Logarithmic grid over the tolerated eavesdropper SINR.
    pub grid_points: usize,
    /// Golden-section stopping tolerance (relative width in the SINR).
    pub refine_rel_tol: f64,
    /// Reported maximum rate is backed off by this many bits/s/Hz so that
    /// the boundary point itself stays numerically feasible.
    pub backoff: f64,
    pub solver: SolverConfig,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        Self {
            grid_points: 30,
            refine_rel_tol: 1e-6,
            backoff: 1e-6,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub target: f64,
    pub feasible: bool,
    /// Largest secrecy target for which the problem is feasible.
    pub r_max: f64,
    /// IR SINR at which targets up to `r_max` are feasible.
    pub gamma0_witness: f64,
    /// Eavesdropper SINR tolerance at the rate-maximizing point.
    pub gamma_e_at_max: f64,
    /// `log2(1 + P ||h||^2 / sigma0^2)`, the rate of the IR alone.
    pub rate_cap: f64,
}

/// Largest IR SINR achievable while every eavesdropper SINR stays at or
/// below `gamma_e`. The ratio constraint is made linear by the substitution
/// `S = P S~ / u`, `Q = P Q~ / u`, normalizing the IR's
/// interference-plus-noise to one.
fn max_ir_sinr(params: &SystemParams, ch: &ChannelSet, gamma_e: f64, cfg: &SolverConfig) -> Option<f64> {
    use crate::linalg::C64;
    let m = params.antennas;
    let snr = params.power / params.ir_noise;
    let h = outer(&ch.h) * C64::from(snr);
    let id = CMatrix::identity(m, m);
    let mut rows = vec![Row {
        herm: vec![None, Some(h.clone())],
        lin: vec![1.0],
        sense: Sense::Eq,
        rhs: 1.0,
    }];
    for (g, &noise) in ch.g.iter().zip(&params.er_noise) {
        let gm = outer(g);
        rows.push(Row {
            herm: vec![Some(-&gm), Some(&gm * C64::from(gamma_e))],
            lin: vec![gamma_e * noise / params.power],
            sense: Sense::Ge,
            rhs: 0.0,
        });
    }
    rows.push(Row {
        herm: vec![Some(id.clone()), Some(id)],
        lin: vec![-1.0],
        sense: Sense::Le,
        rhs: 0.0,
    });
    let prog = HermitianProgram {
        dim: m,
        blocks: 2,
        n_lin: 1,
        objective: vec![Some(h), None],
        objective_lin: vec![0.0],
        rows,
    };
    let sol = prog.solve(&cfg.ipm());
    (sol.status == IpmStatus::Optimal).then_some(sol.objective.max(0.0))
}

/// Finds the largest feasible secrecy rate and compares it with the target.
///
/// The rate achievable with eavesdropper tolerance `gamma_e` is
/// `log2(1 + gamma0_max(gamma_e)) - log2(1 + gamma_e)`, with `gamma0_max`
/// from one semidefinite program; the probe maximizes it over `gamma_e`
/// with a logarithmic grid followed by golden-section refinement.
pub fn check_feasibility(params: &SystemParams, ch: &ChannelSet, cfg: &FeasibilityConfig) -> Result<FeasibilityReport> {
    params.validate()?;
    ch.validate_for(params)?;
    let cap_sinr = gamma0_upper_bound(params, ch);
    let rate_cap = cap_sinr.ln_1p() / std::f64::consts::LN_2;
    let rate_at = |gamma_e: f64| -> (f64, Option<f64>) {
        match max_ir_sinr(params, ch, gamma_e, &cfg.solver) {
            Some(g0) => ((g0.ln_1p() - gamma_e.ln_1p()) / std::f64::consts::LN_2, Some(g0)),
            None => (f64::NEG_INFINITY, None),
        }
    };
    let grid = log_grid(cap_sinr * 1e-9, cap_sinr, cfg.grid_points.max(3));
    let values: Vec<(f64, Option<f64>)> = grid.par_iter().map(|&ge| rate_at(ge)).collect();
    let (best_idx, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v.0 > acc.1 { (i, v.0) } else { acc });
    if values[best_idx].1.is_none() {
        return Err(Error::Solver {
            gamma0: f64::NAN,
            detail: "feasibility probe failed at every grid point".into(),
        });
    }
    let lo = grid[best_idx.saturating_sub(1)];
    let hi = grid[(best_idx + 1).min(grid.len() - 1)];
    let refined = golden_max_log(rate_at, lo, hi, cfg.refine_rel_tol, 200);
    let (gamma_e, rate, gamma0) = if refined.value > values[best_idx].0 {
        (refined.x, refined.value, refined.payload.expect("finite value has payload"))
    } else {
        (grid[best_idx], values[best_idx].0, values[best_idx].1.expect("checked above"))
    };
    let r_max = (rate - cfg.backoff).max(0.0);
    Ok(FeasibilityReport {
        target: params.secrecy_target,
        feasible: params.secrecy_target == 0.0 || params.secrecy_target <= r_max,
        r_max,
        gamma0_witness: gamma0,
        gamma_e_at_max: gamma_e,
        rate_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::model::{generate_channels, ChannelGenSpec};

    fn cv(entries: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(entries.len(), entries.iter().map(|&(r, i)| C64::new(r, i)))
    }

    fn reference_instance(seed: u64, rate: f64) -> (SystemParams, ChannelSet) {
        let params = SystemParams::reference().with_target(rate);
        let ch = generate_channels(&params, &ChannelGenSpec::reference(3, seed)).unwrap();
        (params, ch)
    }

    #[test]
    fn gamma_e_formula() {
        let (mut params, ch) = reference_instance(1, 1.0);
        let inst = build_instance(&params, &ch, 3.0).unwrap();
        assert_eq!(inst.gamma_e, 1.0);
        params.secrecy_target = 2.0;
        let inst = build_instance(&params, &ch, 3.0).unwrap();
        assert_eq!(inst.gamma_e, 0.0);
        assert!(matches!(build_instance(&params, &ch, 2.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn secrecy_identity_holds() {
        let (params, ch) = reference_instance(2, 0.73);
        for gamma0 in [0.7, 3.0, 17.5] {
            let inst = build_instance(&params, &ch, gamma0).unwrap();
            let r = ((1.0 + inst.gamma0) / (1.0 + inst.gamma_e)).log2();
            assert!((r - 0.73).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuous_secrecy_reduces_to_energy_maximization() {
        let g = cv(&[(0.6, 0.2), (-0.3, 0.5)]);
        let h = cv(&[(0.2, 0.0), (0.1, -0.1)]);
        let inst = SdrInstance::new(&h, std::slice::from_ref(&g), &[1.0], 1e-3, 1e9, 1e-2, &[1e-2], 2.0).unwrap();
        let sol = solve_sdr(&inst, &SolverConfig::default());
        assert_eq!(sol.status, SdrStatus::Optimal);
        let expect = g.norm_squared() * 2.0;
        assert!((sol.objective - expect).abs() < 1e-7 * expect, "{} vs {expect}", sol.objective);
    }

    #[test]
    fn zero_power_is_infeasible() {
        let (_, ch) = reference_instance(3, 0.0);
        let inst = SdrInstance::new(&ch.h, &ch.g, &[0.5; 3], 1.0, 0.5, 1e-8, &[1e-8; 3], 0.0).unwrap();
        let sol = solve_sdr(&inst, &SolverConfig::default());
        assert_eq!(sol.status, SdrStatus::Infeasible);
        let ray = sol.ray.unwrap();
        assert!(ray.lambda > 0.0);
    }

    #[test]
    fn lagrangian_matrices_with_zero_duals() {
        let (params, ch) = reference_instance(4, 0.5);
        let inst = build_instance(&params, &ch, 2.0).unwrap();
        let m = lagrangian_matrices(&inst, 0.0, &[0.0; 3], 0.0);
        assert_eq!(m.a, inst.obj_weights);
        assert_eq!(m.b, inst.obj_weights);
        assert_eq!(m.d_star, inst.obj_weights);
    }

    #[test]
    fn solved_instance_certificates() {
        let (params, ch) = reference_instance(5, 1.0);
        let hi = gamma0_upper_bound(&params, &ch);
        let inst = build_instance(&params, &ch, (1.0 + hi) / 2.0).unwrap();
        let sol = solve_sdr(&inst, &SolverConfig::default());
        assert_eq!(sol.status, SdrStatus::Optimal);
        assert!(sol.kkt.primal <= 1e-7, "{:?}", sol.kkt);
        assert!(sol.kkt.dual <= 1e-7, "{:?}", sol.kkt);
        assert!(sol.kkt.complementarity <= 1e-6, "{:?}", sol.kkt);
        let mats = kkt_matrices(&inst, &sol).unwrap();
        let identity = &mats.a - &inst.h * C64::from(sol.lambda * (1.0 + inst.gamma0));
        assert!((identity - &mats.d_star).norm() <= 1e-9 * mats.a.norm().max(1.0));
    }

    #[test]
    fn kkt_matrices_rejects_non_optimal() {
        let (_, ch) = reference_instance(6, 0.0);
        let inst = SdrInstance::new(&ch.h, &ch.g, &[0.5; 3], 1.0, 0.5, 1e-8, &[1e-8; 3], 0.0).unwrap();
        let sol = solve_sdr(&inst, &SolverConfig::default());
        assert!(matches!(kkt_matrices(&inst, &sol), Err(Error::State(_))));
    }

    #[test]
    fn feasibility_trivial_bounds() {
        let (params, ch) = reference_instance(7, 0.0);
        let rep = check_feasibility(&params, &ch, &FeasibilityConfig::default()).unwrap();
        assert!(rep.feasible);
        assert!(rep.r_max > 0.0 && rep.r_max <= rep.rate_cap);
        let too_high = params.clone().with_target(rep.rate_cap + 0.1);
        let rep2 = check_feasibility(&too_high, &ch, &FeasibilityConfig::default()).unwrap();
        assert!(!rep2.feasible);
    }

    #[test]
    fn listing_is_produced() {
        let (params, ch) = reference_instance(8, 0.5);
        let inst = build_instance(&params, &ch, 2.0).unwrap();
        let text = inst.conic_listing();
        assert!(text.starts_with("minimize"));
        assert!(text.contains("constraints 5"));
    }
}
