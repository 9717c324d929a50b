//! Two closed-form designs with a single energy beam in the null space of
//! the IR channel.
//!
//! * Scheme I puts the information beam in the null space of every energy
//!   receiver's channel, so nothing leaks and the information power is the
//!   smallest one meeting the target.
//! * Scheme II sends the information beam along `h` and picks its power
//!   from the set of powers meeting the target, using the energy beam as
//!   artificial noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_evd, outer, svd_right_null, top_eigenpair, CMatrix, CVector, C64};
use crate::model::{evaluate, BeamformingSolution, ChannelSet, Metrics, SchemeTag, SystemParams};
use crate::search::golden_max_log;

/// Orthonormal basis of the null space of `h^H` and the best energy beam
/// direction inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyStage {
    /// `M x (M-1)` basis with `X X^H = I - h h^H / ||h||^2`.
    pub x_tilde: CMatrix,
    /// Largest eigenvalue of `sum_k mu_k zeta X^H G_k X`.
    pub psi_tilde: f64,
    /// Its unit eigenvector (length `M - 1`).
    pub eta_tilde: CVector,
}

impl EnergyStage {
    /// Unit energy-beam direction `X eta` in antenna space.
    pub fn direction(&self) -> CVector {
        &self.x_tilde * &self.eta_tilde
    }
}

pub fn energy_stage(params: &SystemParams, ch: &ChannelSet) -> Result<EnergyStage> {
    params.validate()?;
    ch.validate_for(params)?;
    let m = params.antennas;
    let hn2 = ch.h.norm_squared();
    if !(hn2 > 0.0) {
        return Err(Error::DegenerateChannel("the IR channel is zero".into()));
    }
    let t = CMatrix::identity(m, m) - outer(&ch.h) * C64::from(1.0 / hn2);
    let evd = hermitian_evd(&t)?;
    let x_tilde = evd.vectors.columns(0, m - 1).into_owned();
    let mut w = CMatrix::zeros(m - 1, m - 1);
    for (g, c) in ch.g.iter().zip(params.energy_coefficients()) {
        let gt = x_tilde.adjoint() * g;
        w += outer(&gt) * C64::from(c);
    }
    let (psi_tilde, eta_tilde) = top_eigenpair(&w)?;
    Ok(EnergyStage {
        x_tilde,
        psi_tilde,
        eta_tilde,
    })
}

#[derive(Debug, Clone)]
pub struct SchemeIDesign {
    /// Orthonormal basis of the null space of `G`.
    pub v_tilde: CMatrix,
    /// Information power.
    pub p0: f64,
    pub beams: BeamformingSolution,
    /// `psi_tilde (P - p0)`.
    pub energy: f64,
    pub stage: EnergyStage,
    pub metrics: Metrics,
}

fn scheme1_null(params: &SystemParams, ch: &ChannelSet) -> Result<(CMatrix, f64)> {
    params.validate()?;
    ch.validate_for(params)?;
    if params.energy_receivers >= params.antennas {
        return Err(Error::SchemeInapplicable {
            scheme: "sub1",
            reason: format!(
                "needs fewer energy receivers than antennas (K = {}, M = {})",
                params.energy_receivers, params.antennas
            ),
        });
    }
    let v = svd_right_null(&ch.g_matrix())?.basis;
    let proj = (v.adjoint() * &ch.h).norm();
    if !(proj > 1e-12 * ch.h.norm()) {
        return Err(Error::DegenerateChannel(
            "the IR channel is orthogonal to the null space of the energy receivers' channels".into(),
        ));
    }
    Ok((v, proj))
}

/// Largest target Scheme I can meet: all power on the zero-leakage beam.
pub fn scheme1_rate_limit(params: &SystemParams, ch: &ChannelSet) -> Result<f64> {
    let (_, proj) = scheme1_null(params, ch)?;
    Ok((params.power * proj * proj / params.ir_noise).ln_1p() / std::f64::consts::LN_2)
}

pub fn scheme1(params: &SystemParams, ch: &ChannelSet) -> Result<SchemeIDesign> {
    let (v_tilde, proj) = scheme1_null(params, ch)?;
    let p0 = params.secrecy_target.exp_m1_2() * params.ir_noise / (proj * proj);
    if p0 > params.power {
        return Err(Error::SchemeInfeasible {
            scheme: "sub1",
            target: params.secrecy_target,
            reason: format!(
                "needs information power {p0:e} W above the budget {:e} W",
                params.power
            ),
        });
    }
    let along = &v_tilde * (v_tilde.adjoint() * &ch.h);
    let v0 = along * C64::from(p0.sqrt() / proj);
    let stage = energy_stage(params, ch)?;
    let rest = params.power - p0;
    let w = if rest > 0.0 {
        vec![stage.direction() * C64::from(rest.sqrt())]
    } else {
        Vec::new()
    };
    let beams = BeamformingSolution {
        v0,
        w,
        scheme: SchemeTag::Sub1,
    };
    let metrics = evaluate(ch, &beams, params);
    Ok(SchemeIDesign {
        v_tilde,
        p0,
        energy: stage.psi_tilde * rest,
        beams,
        stage,
        metrics,
    })
}

trait Exp2M1 {
    fn exp_m1_2(self) -> f64;
}

impl Exp2M1 for f64 {
    /// `2^x - 1` without cancellation for small `x`.
    fn exp_m1_2(self) -> f64 {
        (self * std::f64::consts::LN_2).exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerBranch {
    MaxPower,
    MinPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scheme2Config {
    /// Uniform grid points on `(0, P]`.
    pub grid_points: usize,
    /// Boundary bisection tolerance relative to `P`.
    pub boundary_rel_tol: f64,
}

impl Default for Scheme2Config {
    fn default() -> Self {
        Self {
            grid_points: 10_000,
            boundary_rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeIIDesign {
    pub p0: f64,
    pub p0_min: f64,
    pub p0_max: f64,
    pub branch: PowerBranch,
    /// Whether the grid saw feasible powers separated by infeasible ones.
    pub disconnected: bool,
    pub beams: BeamformingSolution,
    pub energy: f64,
    pub stage: EnergyStage,
    pub metrics: Metrics,
}

/// Secrecy rate of Scheme II as a function of the information power.
#[derive(Debug, Clone)]
pub struct Scheme2Rate {
    power: f64,
    snr_gain: f64,
    /// `|h^H g_k|^2 / ||h||^2`
    leak: Vec<f64>,
    /// `|u^H g_k|^2` for the unit energy direction `u`
    jam: Vec<f64>,
    noise: Vec<f64>,
}

impl Scheme2Rate {
    pub fn new(params: &SystemParams, ch: &ChannelSet, stage: &EnergyStage) -> Self {
        let hn2 = ch.h.norm_squared();
        let u = stage.direction();
        Self {
            power: params.power,
            snr_gain: hn2 / params.ir_noise,
            leak: ch.g.iter().map(|g| ch.h.dotc(g).norm_sqr() / hn2).collect(),
            jam: ch.g.iter().map(|g| u.dotc(g).norm_sqr()).collect(),
            noise: params.er_noise.clone(),
        }
    }

    pub fn rate(&self, p0: f64) -> f64 {
        let legit = (p0 * self.snr_gain).ln_1p();
        let worst = self
            .leak
            .iter()
            .zip(&self.jam)
            .zip(&self.noise)
            .map(|((&a, &c), &n)| (p0 * a / ((self.power - p0) * c + n)).ln_1p())
            .fold(f64::NEG_INFINITY, f64::max);
        (legit - worst) / std::f64::consts::LN_2
    }

    /// Largest rate over `(0, P]` by a uniform grid and golden-section
    /// refinement around the best grid point.
    pub fn max_rate(&self, grid_points: usize) -> (f64, f64) {
        let n = grid_points.max(2);
        let step = self.power / n as f64;
        let (mut best_p, mut best_r) = (self.power, self.rate(self.power));
        for j in 1..=n {
            let p = step * j as f64;
            let r = self.rate(p);
            if r > best_r {
                best_p = p;
                best_r = r;
            }
        }
        let lo = (best_p - step).max(step * 1e-3);
        let hi = (best_p + step).min(self.power);
        let g = golden_max_log(|p| (self.rate(p), Some(())), lo, hi, 1e-12, 200);
        if g.value > best_r {
            (g.x, g.value)
        } else {
            (best_p, best_r)
        }
    }
}

/// Largest target Scheme II can meet.
pub fn scheme2_rate_limit(params: &SystemParams, ch: &ChannelSet, cfg: &Scheme2Config) -> Result<f64> {
    let stage = energy_stage(params, ch)?;
    Ok(Scheme2Rate::new(params, ch, &stage).max_rate(cfg.grid_points).1)
}

/// Moves from a feasible point `good` towards an infeasible point `bad`
/// until they are within `tol`, returning the last feasible point.
fn bisect_boundary(feasible: impl Fn(f64) -> bool, mut good: f64, mut bad: f64, tol: f64) -> f64 {
    while (good - bad).abs() > tol {
        let mid = 0.5 * (good + bad);
        if mid == good || mid == bad {
            break;
        }
        if feasible(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

pub fn scheme2(params: &SystemParams, ch: &ChannelSet, cfg: &Scheme2Config) -> Result<SchemeIIDesign> {
    if cfg.grid_points < 2 {
        return Err(Error::validation("Scheme II needs at least two grid points"));
    }
    let stage = energy_stage(params, ch)?;
    let rate = Scheme2Rate::new(params, ch, &stage);
    let target = params.secrecy_target;
    let feasible = |p: f64| rate.rate(p) >= target;
    let n = cfg.grid_points;
    let step = params.power / n as f64;
    let tol = cfg.boundary_rel_tol * params.power;

    let mask: Vec<bool> = (1..=n).map(|j| feasible(step * j as f64)).collect();
    let (p0_min, p0_max, disconnected) = match (mask.iter().position(|&f| f), mask.iter().rposition(|&f| f)) {
        (Some(first), Some(last)) => {
            let disconnected = mask[first..=last].iter().any(|&f| !f);
            let p_first = step * (first + 1) as f64;
            let p_last = step * (last + 1) as f64;
            // the open lower end (0, step] is probed by bisection towards zero
            let p0_min = bisect_boundary(feasible, p_first, step * first as f64, tol);
            let p0_max = if last + 1 == n {
                params.power
            } else {
                bisect_boundary(feasible, p_last, step * (last + 2) as f64, tol)
            };
            (p0_min, p0_max, disconnected)
        }
        _ => {
            // targets just below the peak rate can be met only between grid
            // points; start from the refined maximizer
            let (peak, _) = rate.max_rate(n);
            if !feasible(peak) {
                return Err(Error::SchemeInfeasible {
                    scheme: "sub2",
                    target,
                    reason: format!("no information power on a {n}-point grid or at the rate peak meets the target"),
                });
            }
            let p0_min = bisect_boundary(feasible, peak, (peak - step).max(0.0), tol);
            let p0_max = if feasible(params.power) {
                params.power
            } else {
                bisect_boundary(feasible, peak, (peak + step).min(params.power), tol)
            };
            (p0_min, p0_max, false)
        }
    };

    let hn = ch.h.norm();
    let m_leak: f64 = params
        .weights
        .iter()
        .zip(&ch.g)
        .map(|(&mu, g)| mu * ch.h.dotc(g).norm_sqr() / (hn * hn))
        .sum();
    let u = stage.direction();
    let m_jam: f64 = params.weights.iter().zip(&ch.g).map(|(&mu, g)| mu * u.dotc(g).norm_sqr()).sum();
    let branch = if m_leak >= m_jam {
        PowerBranch::MaxPower
    } else {
        PowerBranch::MinPower
    };
    let p0 = match branch {
        PowerBranch::MaxPower => p0_max,
        PowerBranch::MinPower => p0_min,
    };
    let v0 = &ch.h * C64::from(p0.sqrt() / hn);
    let rest = params.power - p0;
    let w = if rest > 0.0 {
        vec![u * C64::from(rest.sqrt())]
    } else {
        Vec::new()
    };
    let beams = BeamformingSolution {
        v0,
        w,
        scheme: SchemeTag::Sub2,
    };
    let metrics = evaluate(ch, &beams, params);
    Ok(SchemeIIDesign {
        p0,
        p0_min,
        p0_max,
        branch,
        disconnected,
        energy: metrics.weighted_sum_energy,
        beams,
        stage,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compute_secrecy_rate, generate_channels, ChannelGenSpec};

    fn cv(entries: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(entries.len(), entries.iter().map(|&(r, i)| C64::new(r, i)))
    }

    fn orthogonal(rate: f64) -> (SystemParams, ChannelSet) {
        let params = SystemParams {
            antennas: 2,
            energy_receivers: 1,
            power: 1.0,
            ir_noise: 0.01,
            er_noise: vec![0.01],
            efficiency: 0.5,
            weights: vec![1.0],
            secrecy_target: rate,
        };
        let ch = ChannelSet::new(cv(&[(1.0, 0.0), (0.0, 0.0)]), vec![cv(&[(0.0, 0.0), (1.0, 0.0)])]).unwrap();
        (params, ch)
    }

    fn reference(seed: u64, rate: f64) -> (SystemParams, ChannelSet) {
        let params = SystemParams::reference().with_target(rate);
        let ch = generate_channels(&params, &ChannelGenSpec::reference(3, seed)).unwrap();
        (params, ch)
    }

    #[test]
    fn scheme1_orthogonal_closed_form() {
        let (p, ch) = orthogonal(1.0);
        let d = scheme1(&p, &ch).unwrap();
        assert!((d.p0 - 0.01).abs() < 1e-15);
        assert!((d.beams.v0[0] - C64::new(0.1, 0.0)).norm() < 1e-15);
        assert!(d.beams.v0[1].norm() < 1e-15);
        assert!((d.beams.w[0][1].norm() - 0.99f64.sqrt()).abs() < 1e-15);
        assert!(d.beams.w[0][0].norm() < 1e-15);
        assert!((d.energy - 0.495).abs() < 1e-15);
        assert!((compute_secrecy_rate(&ch, &d.beams, &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scheme1_zero_target_gives_all_power_to_energy() {
        let (p, ch) = reference(1, 0.0);
        let d = scheme1(&p, &ch).unwrap();
        assert_eq!(d.p0, 0.0);
        assert!((d.energy - d.stage.psi_tilde * p.power).abs() < 1e-18);
    }

    #[test]
    fn scheme1_random_has_no_leakage() {
        let (p, ch) = reference(2, 1.0);
        let d = scheme1(&p, &ch).unwrap();
        for g in &ch.g {
            assert!(d.beams.v0.dotc(g).norm() <= 1e-9 * d.beams.v0.norm() * g.norm());
        }
        assert!(d.beams.w[0].dotc(&ch.h).norm() <= 1e-9 * d.beams.w[0].norm() * ch.h.norm());
        assert!((compute_secrecy_rate(&ch, &d.beams, &p) - 1.0).abs() < 1e-9);
        assert!((d.energy - d.metrics.weighted_sum_energy).abs() <= 1e-9 * d.energy);
        assert!((d.beams.total_power() - p.power).abs() < 1e-9);
    }

    #[test]
    fn scheme1_applicability_and_budget() {
        let mut p = SystemParams::reference();
        p.energy_receivers = 4;
        p.er_noise = vec![1e-8; 4];
        p.weights = vec![1.0; 4];
        let ch = generate_channels(&p, &ChannelGenSpec::reference(4, 3)).unwrap();
        assert!(matches!(scheme1(&p, &ch), Err(Error::SchemeInapplicable { .. })));
        let (p, ch) = reference(3, 0.0);
        let limit = scheme1_rate_limit(&p, &ch).unwrap();
        assert!(matches!(scheme1(&p.clone().with_target(limit + 0.01), &ch), Err(Error::SchemeInfeasible { .. })));
        assert!(scheme1(&p.with_target(limit - 1e-9), &ch).is_ok());
    }

    #[test]
    fn scheme1_degenerate_channel() {
        let (p, _) = orthogonal(1.0);
        let ch = ChannelSet::new(cv(&[(0.0, 0.0), (1.0, 0.0)]), vec![cv(&[(0.0, 0.0), (2.0, 0.0)])]).unwrap();
        assert!(matches!(scheme1(&p, &ch), Err(Error::DegenerateChannel(_))));
    }

    #[test]
    fn scheme2_orthogonal_closed_form() {
        let (p, ch) = orthogonal(1.0);
        let d = scheme2(&p, &ch, &Scheme2Config::default()).unwrap();
        assert_eq!(d.branch, PowerBranch::MinPower);
        assert!((d.p0_min - 0.01).abs() < 1e-9);
        assert_eq!(d.p0_max, 1.0);
        assert!(!d.disconnected);
        assert!((d.p0 - 0.01).abs() < 1e-9);
        assert!((d.energy - 0.495).abs() < 1e-9);
        assert!(compute_secrecy_rate(&ch, &d.beams, &p) >= 1.0 - 1e-9);
    }

    #[test]
    fn scheme2_above_capacity_is_infeasible() {
        let (p, ch) = orthogonal(0.0);
        let cap = (1.0f64 + 1.0 / 0.01).log2();
        assert!(matches!(
            scheme2(&p.with_target(cap + 0.01), &ch, &Scheme2Config::default()),
            Err(Error::SchemeInfeasible { .. })
        ));
    }

    #[test]
    fn scheme2_random_feasible_set_matches_grid() {
        let (p, ch) = reference(4, 0.0);
        let cfg = Scheme2Config::default();
        let limit = scheme2_rate_limit(&p, &ch, &cfg).unwrap();
        let p = p.with_target(0.6 * limit);
        let d = scheme2(&p, &ch, &cfg).unwrap();
        let stage = energy_stage(&p, &ch).unwrap();
        let r = Scheme2Rate::new(&p, &ch, &stage);
        assert!(r.rate(d.p0_min) >= p.secrecy_target && r.rate(d.p0_max) >= p.secrecy_target);
        assert!(d.p0 >= d.p0_min && d.p0 <= d.p0_max && d.p0 > 0.0);
        for j in 1..=cfg.grid_points {
            let pw = p.power * j as f64 / cfg.grid_points as f64;
            if pw < d.p0_min || pw > d.p0_max {
                assert!(r.rate(pw) < p.secrecy_target);
            }
        }
        let achieved = compute_secrecy_rate(&ch, &d.beams, &p);
        assert!(achieved >= p.secrecy_target - 1e-6);
        let dir = &d.beams.v0 / C64::from(d.beams.v0.norm());
        assert!((dir.dotc(&ch.h).norm() - ch.h.norm()).abs() < 1e-12 * ch.h.norm());
        assert!((d.beams.total_power() - p.power).abs() < 1e-9);
    }

    #[test]
    fn scheme2_meets_its_own_rate_limit() {
        let cfg = Scheme2Config::default();
        for seed in 0..6 {
            let base = SystemParams::reference();
            let ch = generate_channels(&base, &ChannelGenSpec::reference(3, seed)).unwrap();
            let limit = scheme2_rate_limit(&base, &ch, &cfg).unwrap();
            let d = scheme2(&base.clone().with_target(limit), &ch, &cfg).unwrap();
            assert!(d.p0_min <= d.p0 && d.p0 <= d.p0_max);
            assert!(compute_secrecy_rate(&ch, &d.beams, &base) >= limit - 1e-9);
        }
    }
}
