//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

// clarabel's SDP support links LAPACK through this crate
extern crate openblas_src;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, NonnegativeConeT, PSDTriangleConeT, SolverStatus, SupportedConeT,
};
use swipt::linalg::{CMatrix, CVector, C64};
use swipt::model::{generate_channels, ChannelGenSpec, ChannelSet, SystemParams};
use swipt::sdr::SdrInstance;

/// Reference system with `m` antennas and `k` energy receivers.
pub fn params(m: usize, k: usize) -> SystemParams {
    SystemParams {
        antennas: m,
        energy_receivers: k,
        er_noise: vec![1e-8; k],
        weights: vec![1.0; k],
        ..SystemParams::reference()
    }
}

pub fn channels(p: &SystemParams, seed: u64) -> ChannelSet {
    generate_channels(p, &ChannelGenSpec::reference(p.energy_receivers, seed)).unwrap()
}

/// Variable layout of one Hermitian `m x m` matrix: real parts of the upper
/// triangle, then imaginary parts of the strict upper triangle.
struct HermVars {
    m: usize,
    offset: usize,
}

impl HermVars {
    fn len(&self) -> usize {
        self.m * self.m
    }

    fn re(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // row-major upper triangle
        self.offset + i * self.m - i * (i + 1) / 2 + j
    }

    fn im(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        let base = self.offset + self.m * (self.m + 1) / 2;
        base + i * (self.m - 1) - i * (i + 1) / 2 + (j - 1)
    }

    /// Coefficients of `Re Tr(C X)` for Hermitian `C`.
    fn trace_coeffs(&self, c: &CMatrix, out: &mut [f64], scale: f64) {
        for i in 0..self.m {
            out[self.re(i, i)] += scale * c[(i, i)].re;
            for j in i + 1..self.m {
                out[self.re(i, j)] += scale * 2.0 * c[(i, j)].re;
                out[self.im(i, j)] += scale * 2.0 * c[(i, j)].im;
            }
        }
    }

    /// Entry `(p, q)` of the real embedding `[[Xr, -Xi], [Xi, Xr]]` as
    /// `(variable, coefficient)`.
    fn embedding_entry(&self, p: usize, q: usize) -> Option<(usize, f64)> {
        let m = self.m;
        let (bp, bq) = (p / m, q / m);
        let (a, b) = (p % m, q % m);
        match (bp, bq) {
            (0, 0) | (1, 1) => Some((self.re(a, b), 1.0)),
            _ => {
                // upper-right block is -Xi, lower-left is Xi
                let sign = if bp == 0 { -1.0 } else { 1.0 };
                match a.cmp(&b) {
                    std::cmp::Ordering::Equal => None,
                    std::cmp::Ordering::Less => Some((self.im(a, b), sign)),
                    std::cmp::Ordering::Greater => Some((self.im(b, a), -sign)),
                }
            }
        }
    }

    fn matrix(&self, x: &[f64]) -> CMatrix {
        let m = self.m;
        CMatrix::from_fn(m, m, |i, j| {
            let re = x[self.re(i, j)];
            let im = match i.cmp(&j) {
                std::cmp::Ordering::Equal => 0.0,
                std::cmp::Ordering::Less => x[self.im(i, j)],
                std::cmp::Ordering::Greater => -x[self.im(j, i)],
            };
            C64::new(re, im)
        })
    }
}

pub struct OracleSolution {
    /// Optimal value in Joules per slot.
    pub objective: f64,
    pub s: CMatrix,
    pub q: CMatrix,
    pub status: SolverStatus,
}

/// Solves the relaxation at a fixed IR SINR with Clarabel.
pub fn clarabel_sdr(inst: &SdrInstance) -> OracleSolution {
    let m = inst.h.nrows();
    let k = inst.g.len();
    let sv = HermVars { m, offset: 0 };
    let qv = HermVars { m, offset: m * m };
    let n = sv.len() + qv.len();
    let obj_scale = inst.obj_weights.norm().max(f64::MIN_POSITIVE);

    let mut c = vec![0.0; n];
    sv.trace_coeffs(&inst.obj_weights, &mut c, -1.0 / obj_scale);
    qv.trace_coeffs(&inst.obj_weights, &mut c, -1.0 / obj_scale);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut b = Vec::new();
    // row `coeffs . x + rhs >= 0` as `s = b - A x >= 0`, scaled to a unit
    // largest coefficient
    let mut push = |coeffs: Vec<f64>, rhs: f64| {
        let s = coeffs.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
        rows.push(coeffs.iter().map(|v| -v / s).collect());
        b.push(rhs / s);
    };
    let mut ir = vec![0.0; n];
    sv.trace_coeffs(&inst.h, &mut ir, 1.0);
    qv.trace_coeffs(&inst.h, &mut ir, -inst.gamma0);
    push(ir, -inst.gamma0 * inst.ir_noise);
    for (g, &noise) in inst.g.iter().zip(&inst.er_noise) {
        let mut er = vec![0.0; n];
        sv.trace_coeffs(g, &mut er, -1.0);
        qv.trace_coeffs(g, &mut er, inst.gamma_e);
        push(er, inst.gamma_e * noise);
    }
    let mut pw = vec![0.0; n];
    let id = CMatrix::identity(m, m);
    sv.trace_coeffs(&id, &mut pw, -1.0);
    qv.trace_coeffs(&id, &mut pw, -1.0);
    push(pw, inst.power);

    let sqrt2 = std::f64::consts::SQRT_2;
    for vars in [&sv, &qv] {
        for q in 0..2 * m {
            for p in 0..=q {
                let mut row = vec![0.0; n];
                if let Some((idx, coef)) = vars.embedding_entry(p, q) {
                    let scale = if p == q { 1.0 } else { sqrt2 };
                    row[idx] = -coef * scale;
                }
                rows.push(row);
                b.push(0.0);
            }
        }
    }

    let a = CscMatrix::from(&rows);
    let pmat = CscMatrix::zeros((n, n));
    let cones: Vec<SupportedConeT<f64>> = vec![
        NonnegativeConeT(k + 2),
        PSDTriangleConeT(2 * m),
        PSDTriangleConeT(2 * m),
    ];
    let settings = DefaultSettings {
        verbose: false,
        max_iter: 400,
        tol_gap_abs: 1e-11,
        tol_gap_rel: 1e-11,
        tol_feas: 1e-11,
        ..DefaultSettings::default()
    };
    let mut solver = DefaultSolver::new(&pmat, &c, &a, &b, &cones, settings).unwrap();
    solver.solve();
    let x = &solver.solution.x;
    let s = sv.matrix(x);
    let q = qv.matrix(x);
    OracleSolution {
        objective: inst.objective(&s, &q),
        s,
        q,
        status: solver.solution.status,
    }
}

/// Unit vector in C^2 on the Bloch sphere (global phase removed).
fn bloch(theta: f64, phi: f64) -> [C64; 2] {
    [C64::new((0.5 * theta).cos(), 0.0), C64::from_polar((0.5 * theta).sin(), phi)]
}

fn gain(ch: &CVector, v: &[C64; 2]) -> f64 {
    (ch[0].conj() * v[0] + ch[1].conj() * v[1]).norm_sqr()
}

/// Best energy for fixed beam directions with gains `a0 = |h^H v|^2`,
/// `a1 = |h^H w|^2`, `b0 = |g^H v|^2`, `b1 = |g^H w|^2`, maximized over
/// the information power `p` in `[0, P]`. The secrecy condition is a
/// quadratic inequality in `p` and the energy is linear in `p`, so the
/// optimum sits at `P`, at `0` or at a root.
fn best_split(p: &SystemParams, a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    let big_p = p.power;
    let t = p.secrecy_target.exp2();
    let c0 = p.ir_noise + big_p * a1;
    let c1 = p.er_noise[0] + big_p * b1;
    let qa = -(a0 - a1) * b1 + t * (b0 - b1) * a1;
    let qb = (a0 - a1) * c1 - b1 * c0 - t * ((b0 - b1) * c0 - a1 * c1);
    let qc = c0 * c1 * (1.0 - t);
    let q = |x: f64| (qa * x + qb) * x + qc;
    let scale = qc.abs().max(1e-300);
    let energy = |x: f64| p.efficiency * p.weights[0] * (b0 * x + b1 * (big_p - x));
    let mut best = f64::NEG_INFINITY;
    let mut consider = |x: f64| {
        if (0.0..=big_p).contains(&x) && q(x) >= -1e-12 * scale {
            best = best.max(energy(x));
        }
    };
    consider(0.0);
    consider(big_p);
    if qa.abs() > 1e-300 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // numerically stable pair of roots
            let r = -0.5 * (qb + qb.signum() * sq);
            if r != 0.0 {
                consider(r / qa);
                consider(qc / r);
            }
        }
    } else if qb != 0.0 {
        consider(-qc / qb);
    }
    best
}

/// Brute-force maximum energy for `M = 2`, `K = 1` over rank-one designs
/// `(v0, w1)`: a Bloch-sphere grid for each direction, the exact best power
/// split for each pair, then a shrinking pattern search around the best cell.
pub fn brute_force_m2k1(p: &SystemParams, ch: &ChannelSet, n: usize) -> f64 {
    assert_eq!((p.antennas, p.energy_receivers), (2, 1));
    let g = &ch.g[0];
    let dirs: Vec<(f64, f64, f64, f64)> = (0..n)
        .flat_map(|i| {
            (0..n).map(move |j| {
                let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
                let phi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                (theta, phi)
            })
        })
        .map(|(theta, phi)| {
            let v = bloch(theta, phi);
            (theta, phi, gain(&ch.h, &v), gain(g, &v))
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    for &(t0, f0, a0, b0) in &dirs {
        for &(t1, f1, a1, b1) in &dirs {
            let e = best_split(p, a0, a1, b0, b1);
            if e > best.0 {
                best = (e, [t0, f0, t1, f1]);
            }
        }
    }
    let eval = |x: &[f64; 4]| {
        let v = bloch(x[0], x[1]);
        let w = bloch(x[2], x[3]);
        best_split(p, gain(&ch.h, &v), gain(&ch.h, &w), gain(g, &v), gain(g, &w))
    };
    let mut step = 2.0 * std::f64::consts::PI / n as f64;
    while step > 1e-9 {
        let mut improved = false;
        for d in 0..4 {
            for s in [-1.0, 1.0] {
                let mut x = best.1;
                x[d] += s * step;
                let e = eval(&x);
                if e > best.0 {
                    best = (e, x);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best.0
}

#[allow(unused)]
pub fn hermitian_close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}
