//! Primal-dual interior-point method for small dense conic programs over a
//! product of real PSD cones and a nonnegative orthant:
//!
//! ```text
//! minimize    <C, X>
//! subject to  <A_i, X> = b_i,   i = 1..m
//!             X in S+^{n_1} x ... x S+^{n_p} x R+^{l}
//! ```
//!
//! The solver runs on the homogeneous self-dual embedding, so it needs no
//! feasible starting point and returns an infeasibility certificate instead
//! of diverging. Directions use Nesterov-Todd scaling with a Mehrotra
//! predictor-corrector. The Schur complement is only `m x m`, which is what
//! makes the dense formulation cheap for the problem sizes used here.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};

/// Element of the cone's ambient space: one symmetric matrix per PSD block
/// plus a vector for the orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVec {
    pub psd: Vec<DMatrix<f64>>,
    pub lin: DVector<f64>,
}

impl BlockVec {
    pub fn zeros(dims: &[usize], n_lin: usize) -> Self {
        Self {
            psd: dims.iter().map(|&n| DMatrix::zeros(n, n)).collect(),
            lin: DVector::zeros(n_lin),
        }
    }

    /// Identity element of the cone (the central starting point).
    pub fn identity(dims: &[usize], n_lin: usize) -> Self {
        Self {
            psd: dims.iter().map(|&n| DMatrix::identity(n, n)).collect(),
            lin: DVector::from_element(n_lin, 1.0),
        }
    }

    pub fn dot(&self, other: &BlockVec) -> f64 {
        let mut acc = self.lin.dot(&other.lin);
        for (a, b) in self.psd.iter().zip(&other.psd) {
            acc += a.dot(b);
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &BlockVec) {
        for (a, b) in self.psd.iter_mut().zip(&other.psd) {
            *a += b * alpha;
        }
        self.lin.axpy(alpha, &other.lin, 1.0);
    }

    pub fn scaled(&self, alpha: f64) -> BlockVec {
        BlockVec {
            psd: self.psd.iter().map(|a| a * alpha).collect(),
            lin: &self.lin * alpha,
        }
    }
}

/// Standard-form conic program; see the module documentation.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub psd_dims: Vec<usize>,
    pub n_lin: usize,
    pub c: BlockVec,
    pub a: Vec<BlockVec>,
    pub b: DVector<f64>,
}

impl ConicProblem {
    fn degree(&self) -> usize {
        self.psd_dims.iter().sum::<usize>() + self.n_lin
    }

    fn apply_a(&self, x: &BlockVec) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|ai| ai.dot(x)))
    }

    fn apply_at(&self, y: &DVector<f64>) -> BlockVec {
        let mut out = BlockVec::zeros(&self.psd_dims, self.n_lin);
        for (ai, &yi) in self.a.iter().zip(y.iter()) {
            out.axpy(yi, ai);
        }
        out
    }

    /// Dense listing for cross-checking against other solvers: dimensions,
    /// the objective, then each constraint, every PSD block row-major.
    pub fn to_listing(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let dims: Vec<String> = self.psd_dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "minimize <C,X> s.t. <A_i,X> = b_i");
        let _ = writeln!(out, "psd_blocks {}", dims.join(" "));
        let _ = writeln!(out, "nonneg {}", self.n_lin);
        let _ = writeln!(out, "constraints {}", self.a.len());
        let block = |name: &str, v: &BlockVec, out: &mut String| {
            let _ = writeln!(out, "{name}");
            for (j, m) in v.psd.iter().enumerate() {
                let _ = writeln!(out, "  psd {j}");
                for r in 0..m.nrows() {
                    let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:.17e}", m[(r, c)])).collect();
                    let _ = writeln!(out, "    {}", row.join(" "));
                }
            }
            let lin: Vec<String> = v.lin.iter().map(|x| format!("{x:.17e}")).collect();
            let _ = writeln!(out, "  nonneg {}", lin.join(" "));
        };
        block("C", &self.c, &mut out);
        for (i, ai) in self.a.iter().enumerate() {
            block(&format!("A {i} b {:.17e}", self.b[i]), ai, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpmSettings {
    /// Residual and relative-gap level at which a solution counts as optimal.
    pub tol: f64,
    /// The solver keeps iterating past `tol` until it reaches this level or
    /// stops making progress, then returns the best iterate seen.
    pub refine_tol: f64,
    /// Tolerance on normalized infeasibility certificates.
    pub infeasibility_tol: f64,
    /// Relative gap accepted when the residuals meet `tol` but the gap
    /// stalls. Close to the feasibility boundary the multipliers grow
    /// without bound and the attainable gap is limited to roughly
    /// `|y| * residual`.
    pub stalled_gap_tol: f64,
    /// Iterations without improving the best score before giving up.
    pub stall_iterations: usize,
    pub max_iter: usize,
    pub step_fraction: f64,
}

impl Default for IpmSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            refine_tol: 1e-11,
            infeasibility_tol: 1e-8,
            stalled_gap_tol: 1e-6,
            stall_iterations: 10,
            max_iter: 200,
            step_fraction: 0.99,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct IpmSolution {
    pub status: IpmStatus,
    /// Primal point (normalized by the homogeneous variable when optimal).
    pub x: BlockVec,
    /// Equality multipliers; an improving ray when primal infeasible.
    pub y: DVector<f64>,
    pub z: BlockVec,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub rel_gap: f64,
}

struct PsdScaling {
    r: DMatrix<f64>,
    rti: DMatrix<f64>,
    lambda: DVector<f64>,
}

struct LinScaling {
    w: DVector<f64>,
    lambda: DVector<f64>,
}

struct Scaling {
    psd: Vec<PsdScaling>,
    lin: LinScaling,
}

impl Scaling {
    fn new(x: &BlockVec, z: &BlockVec) -> Option<Self> {
        let mut psd = Vec::with_capacity(x.psd.len());
        for (xb, zb) in x.psd.iter().zip(&z.psd) {
            let l = Cholesky::new(xb.clone())?.unpack();
            let rz = Cholesky::new(zb.clone())?.unpack();
            let svd = SVD::try_new(rz.transpose() * &l, true, true, f64::EPSILON, 500)?;
            let u = svd.u?;
            let v = svd.v_t?.transpose();
            let lambda = svd.singular_values;
            if lambda.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
                return None;
            }
            let inv_sqrt = DMatrix::from_diagonal(&lambda.map(|s| 1.0 / s.sqrt()));
            psd.push(PsdScaling {
                r: &l * &v * &inv_sqrt,
                rti: &rz * &u * &inv_sqrt,
                lambda,
            });
        }
        let w = x.lin.zip_map(&z.lin, |a, b| (a / b).sqrt());
        let lambda = x.lin.zip_map(&z.lin, |a, b| (a * b).sqrt());
        if w.iter().chain(lambda.iter()).any(|v| !(v.is_finite() && *v > 0.0)) {
            return None;
        }
        Some(Self { psd, lin: LinScaling { w, lambda } })
    }

    /// Every entry of `r^T V r` per block, then `w o v` for the linear part,
    /// so that `<flatten(U), flatten(V)> = <U, W V W>`.
    fn flatten(&self, v: &BlockVec) -> DVector<f64> {
        let mut out = Vec::new();
        for (s, m) in self.psd.iter().zip(&v.psd) {
            out.extend((s.r.transpose() * m * &s.r).iter().copied());
        }
        out.extend(self.lin.w.iter().zip(v.lin.iter()).map(|(w, x)| w * x));
        DVector::from_vec(out)
    }

    /// `W V W` with `W = r r^T` per block.
    fn apply_w(&self, v: &BlockVec) -> BlockVec {
        BlockVec {
            psd: self
                .psd
                .iter()
                .zip(&v.psd)
                .map(|(s, m)| {
                    let wm = &s.r * (s.r.transpose() * m * &s.r) * s.r.transpose();
                    symmetrize(&wm)
                })
                .collect(),
            lin: self.lin.w.zip_map(&v.lin, |w, x| w * w * x),
        }
    }

    fn scaled_x(&self, dx: &BlockVec) -> BlockVec {
        BlockVec {
            psd: self
                .psd
                .iter()
                .zip(&dx.psd)
                .map(|(s, m)| symmetrize(&(s.rti.transpose() * m * &s.rti)))
                .collect(),
            lin: dx.lin.zip_map(&self.lin.w, |x, w| x / w),
        }
    }

    fn scaled_z(&self, dz: &BlockVec) -> BlockVec {
        BlockVec {
            psd: self
                .psd
                .iter()
                .zip(&dz.psd)
                .map(|(s, m)| symmetrize(&(s.r.transpose() * m * &s.r)))
                .collect(),
            lin: dz.lin.zip_map(&self.lin.w, |z, w| z * w),
        }
    }

    /// Maps a scaled-space direction back: `r U r^T`.
    fn unscale_x(&self, u: &BlockVec) -> BlockVec {
        BlockVec {
            psd: self
                .psd
                .iter()
                .zip(&u.psd)
                .map(|(s, m)| symmetrize(&(&s.r * m * s.r.transpose())))
                .collect(),
            lin: u.lin.zip_map(&self.lin.w, |x, w| x * w),
        }
    }

    /// Solves `Lambda o U = T` for every block, `o` the symmetrized product.
    fn lambda_solve(&self, t: &BlockVec) -> BlockVec {
        BlockVec {
            psd: self
                .psd
                .iter()
                .zip(&t.psd)
                .map(|(s, m)| {
                    let n = m.nrows();
                    DMatrix::from_fn(n, n, |i, j| 2.0 * m[(i, j)] / (s.lambda[i] + s.lambda[j]))
                })
                .collect(),
            lin: t.lin.zip_map(&self.lin.lambda, |t, l| t / l),
        }
    }

    /// `sigma*mu*e - Lambda o Lambda - corr`.
    fn complementarity_target(&self, sigma_mu: f64, corr: Option<(&BlockVec, &BlockVec)>) -> BlockVec {
        let psd = self
            .psd
            .iter()
            .enumerate()
            .map(|(b, s)| {
                let n = s.lambda.len();
                let mut t = DMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        sigma_mu - s.lambda[i] * s.lambda[i]
                    } else {
                        0.0
                    }
                });
                if let Some((dx, dz)) = corr {
                    let p = &dx.psd[b] * &dz.psd[b];
                    t -= (&p + p.transpose()) * 0.5;
                }
                t
            })
            .collect();
        let mut lin = self.lin.lambda.map(|l| sigma_mu - l * l);
        if let Some((dx, dz)) = corr {
            lin -= dx.lin.component_mul(&dz.lin);
        }
        BlockVec { psd, lin }
    }

    /// Largest step keeping `Lambda + alpha * d` in the cone, for a direction
    /// already expressed in scaled coordinates.
    fn max_step(&self, d: &BlockVec) -> f64 {
        let mut alpha = f64::INFINITY;
        for (s, m) in self.psd.iter().zip(&d.psd) {
            let inv = s.lambda.map(|l| 1.0 / l.sqrt());
            let n = m.nrows();
            let t = DMatrix::from_fn(n, n, |i, j| inv[i] * m[(i, j)] * inv[j]);
            let e = SymmetricEigen::new(symmetrize(&t)).eigenvalues.min();
            if e < 0.0 {
                alpha = alpha.min(-1.0 / e);
            }
        }
        for (l, dl) in self.lin.lambda.iter().zip(d.lin.iter()) {
            if *dl < 0.0 {
                alpha = alpha.min(-l / dl);
            }
        }
        alpha
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

struct Direction {
    dx: BlockVec,
    dy: DVector<f64>,
    dz: BlockVec,
    dtau: f64,
    dkappa: f64,
}

struct Iterate {
    x: BlockVec,
    y: DVector<f64>,
    z: BlockVec,
    tau: f64,
    kappa: f64,
}

fn step_to_boundary(alpha_cone: f64, tau: f64, kappa: f64, d: &Direction) -> f64 {
    let mut alpha = alpha_cone;
    if d.dtau < 0.0 {
        alpha = alpha.min(-tau / d.dtau);
    }
    if d.dkappa < 0.0 {
        alpha = alpha.min(-kappa / d.dkappa);
    }
    alpha
}

pub fn solve(problem: &ConicProblem, settings: &IpmSettings) -> IpmSolution {
    let m = problem.a.len();
    let dims = &problem.psd_dims;
    let nu = problem.degree() as f64;
    let b = &problem.b;
    let c = &problem.c;
    let norm_b = b.norm();
    let norm_c = c.norm();

    let mut it = Iterate {
        x: BlockVec::identity(dims, problem.n_lin),
        y: DVector::zeros(m),
        z: BlockVec::identity(dims, problem.n_lin),
        tau: 1.0,
        kappa: 1.0,
    };

    let mut best: Option<(f64, [f64; 3], Iterate)> = None;
    let mut infeasible: Option<(IpmStatus, Iterate)> = None;
    let mut iterations = 0;
    let mut best_iter = 0;

    for iter in 0..settings.max_iter {
        iterations = iter;
        let ax = problem.apply_a(&it.x);
        let aty = problem.apply_at(&it.y);
        let cx = c.dot(&it.x);
        let by = b.dot(&it.y);
        let xz = it.x.dot(&it.z);

        let r1 = &ax - b * it.tau;
        let mut r2 = aty.clone();
        r2.axpy(1.0, &it.z);
        r2.axpy(-it.tau, c);
        let r3 = by - cx - it.kappa;
        let mu = (xz + it.tau * it.kappa) / (nu + 1.0);

        let pres = (&ax / it.tau - b).norm() / (1.0 + norm_b);
        let dres = r2.norm() / it.tau / (1.0 + norm_c);
        let pobj = cx / it.tau;
        let dobj = by / it.tau;
        let gap = (xz / (it.tau * it.tau)).max((pobj - dobj).abs());
        let rel_gap = gap / (1.0 + pobj.abs().min(dobj.abs()));
        let score = pres.max(dres).max(rel_gap);

        if !score.is_finite() {
            break;
        }
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            best_iter = iter;
            best = Some((
                score,
                [pres, dres, rel_gap],
                Iterate {
                    x: it.x.clone(),
                    y: it.y.clone(),
                    z: it.z.clone(),
                    tau: it.tau,
                    kappa: it.kappa,
                },
            ));
        }
        // stop when refined, or when no progress is being made on an
        // iterate that is already acceptable
        let acceptable = best.as_ref().is_some_and(|(s, r, _)| {
            *s <= settings.tol || (r[0] <= settings.tol && r[1] <= settings.tol && r[2] <= settings.stalled_gap_tol)
        });
        if score <= settings.refine_tol || (acceptable && iter - best_iter >= settings.stall_iterations) {
            break;
        }

        let mut cert = aty.clone();
        cert.axpy(1.0, &it.z);
        if by > 0.0 && cert.norm() <= settings.infeasibility_tol * by && score > settings.tol {
            infeasible = Some((IpmStatus::PrimalInfeasible, it));
            break;
        }
        if cx < 0.0 && ax.norm() <= settings.infeasibility_tol * (-cx) && score > settings.tol {
            infeasible = Some((IpmStatus::DualInfeasible, it));
            break;
        }

        let Some(scaling) = Scaling::new(&it.x, &it.z) else {
            break;
        };

        // Reduced system in the scaled space: with a~_i = r^T A_i r and
        // c~ = r^T C r, the Schur matrix is M = A~^T A~. Eliminating dtau
        // through a QR factorization keeps its pivot,
        // ||c~ - P c~||^2 + b^T M^-1 b + kappa/tau, free of cancellation.
        let waw: Vec<BlockVec> = problem.a.iter().map(|ai| scaling.apply_w(ai)).collect();
        let wcw = scaling.apply_w(c);
        let a_scaled = DMatrix::from_columns(&problem.a.iter().map(|ai| scaling.flatten(ai)).collect::<Vec<_>>());
        let c_scaled = scaling.flatten(c);
        let qr = a_scaled.clone().qr();
        let q_fac = qr.q();
        let r_fac = qr.r();
        let m_solve = |v: &DVector<f64>| -> Option<DVector<f64>> {
            let t = r_fac.tr_solve_upper_triangular(v)?;
            r_fac.solve_upper_triangular(&t)
        };
        let proj = q_fac.tr_mul(&c_scaled);
        let g = a_scaled.tr_mul(&c_scaled);
        let Some(mb) = m_solve(b) else {
            break;
        };
        let Some(mgb) = m_solve(&(&g + b)) else {
            break;
        };
        let pivot = (&c_scaled - &q_fac * &proj).norm_squared() + b.dot(&mb) + it.kappa / it.tau;

        let solve_dir = |eta: f64, rx: &BlockVec, rk: f64| -> Option<Direction> {
            let mut t = rx.clone();
            t.axpy(eta, &scaling.apply_w(&r2));
            let at = problem.apply_a(&t);
            let mut rhs = DVector::zeros(m);
            for i in 0..m {
                rhs[i] = -eta * r1[i] - at[i];
            }
            let rhs_tau = -eta * r3 + c.dot(&t) + rk / it.tau;
            let u = m_solve(&rhs.rows(0, m).into_owned())?;
            let dtau = (rhs_tau - (b - &g).dot(&u)) / pivot;
            let dy = u + &mgb * dtau;
            let mut dz = r2.scaled(-eta);
            dz.axpy(-1.0, &problem.apply_at(&dy));
            dz.axpy(dtau, c);
            let mut dx = t;
            for (wa, &d) in waw.iter().zip(dy.iter()) {
                dx.axpy(d, wa);
            }
            dx.axpy(-dtau, &wcw);
            let dkappa = (rk - it.kappa * dtau) / it.tau;
            if !(dtau.is_finite() && dkappa.is_finite()) {
                return None;
            }
            Some(Direction { dx, dy, dz, dtau, dkappa })
        };

        // predictor
        let target_aff = scaling.complementarity_target(0.0, None);
        let rx_aff = scaling.unscale_x(&scaling.lambda_solve(&target_aff));
        let Some(d_aff) = solve_dir(1.0, &rx_aff, -it.tau * it.kappa) else {
            break;
        };
        let dxs_aff = scaling.scaled_x(&d_aff.dx);
        let dzs_aff = scaling.scaled_z(&d_aff.dz);
        let alpha_aff = step_to_boundary(
            scaling.max_step(&dxs_aff).min(scaling.max_step(&dzs_aff)),
            it.tau,
            it.kappa,
            &d_aff,
        )
        .min(1.0);
        let sigma = (1.0 - alpha_aff).clamp(0.0, 1.0).powi(3);

        // corrector
        let target = scaling.complementarity_target(sigma * mu, Some((&dxs_aff, &dzs_aff)));
        let rx = scaling.unscale_x(&scaling.lambda_solve(&target));
        let rk = sigma * mu - it.tau * it.kappa - d_aff.dtau * d_aff.dkappa;
        let Some(d) = solve_dir(1.0 - sigma, &rx, rk) else {
            break;
        };
        let alpha_max = step_to_boundary(
            scaling
                .max_step(&scaling.scaled_x(&d.dx))
                .min(scaling.max_step(&scaling.scaled_z(&d.dz))),
            it.tau,
            it.kappa,
            &d,
        );
        let alpha = (settings.step_fraction * alpha_max).min(1.0);
        if !(alpha > 1e-12) {
            break;
        }

        it.x.axpy(alpha, &d.dx);
        it.z.axpy(alpha, &d.dz);
        it.y.axpy(alpha, &d.dy, 1.0);
        it.tau += alpha * d.dtau;
        it.kappa += alpha * d.dkappa;
        iterations = iter + 1;
    }

    if let Some((status, ray)) = infeasible {
        let (primal_residual, dual_residual, rel_gap) =
            best.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |(_, r, _)| (r[0], r[1], r[2]));
        return IpmSolution {
            status,
            x: ray.x,
            y: ray.y,
            z: ray.z,
            iterations,
            primal_residual,
            dual_residual,
            rel_gap,
        };
    }

    match best {
        Some((score, res, b_it)) => {
            let status = if score <= settings.tol
                || (res[0] <= settings.tol && res[1] <= settings.tol && res[2] <= settings.stalled_gap_tol)
            {
                IpmStatus::Optimal
            } else {
                IpmStatus::NumericalFailure
            };
            let inv = 1.0 / b_it.tau;
            IpmSolution {
                status,
                x: b_it.x.scaled(inv),
                y: b_it.y * inv,
                z: b_it.z.scaled(inv),
                iterations,
                primal_residual: res[0],
                dual_residual: res[1],
                rel_gap: res[2],
            }
        }
        None => IpmSolution {
            status: IpmStatus::NumericalFailure,
            x: BlockVec::zeros(dims, problem.n_lin),
            y: DVector::zeros(m),
            z: BlockVec::zeros(dims, problem.n_lin),
            iterations,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            rel_gap: f64::NAN,
        },
    }
}
