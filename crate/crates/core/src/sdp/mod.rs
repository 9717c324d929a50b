//! Complex Hermitian semidefinite programs on top of the real conic solver.
//!
//! A Hermitian `n x n` variable `S = S_r + i S_i` is represented by a real
//! symmetric `2n x 2n` variable `Y`; for structured `Y = [[S_r, -S_i], [S_i, S_r]]`
//! every trace-linear function maps exactly, `Re Tr(A S) = Tr(emb(A) Y) / 2`.
//! An unstructured PSD `Y` is mapped back by averaging the two diagonal and
//! the two off-diagonal blocks, which keeps it PSD and leaves every
//! embedded trace unchanged.

pub mod ipm;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{trace_product, CMatrix, C64};
pub use ipm::{IpmSettings, IpmStatus};
use ipm::{BlockVec, ConicProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `lhs >= rhs`
    Ge,
    /// `lhs <= rhs`
    Le,
    Eq,
}

/// One trace-linear constraint `sum_b Re Tr(A_b X_b) + a^T t (sense) rhs`.
#[derive(Debug, Clone)]
pub struct Row {
    /// Coefficient per Hermitian block; `None` means zero.
    pub herm: Vec<Option<CMatrix>>,
    /// Coefficients of the nonnegative scalar variables.
    pub lin: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize sum_b Re Tr(C_b X_b) + c^T t` over Hermitian PSD blocks `X_b`
/// and nonnegative scalars `t`.
#[derive(Debug, Clone)]
pub struct HermitianProgram {
    pub dim: usize,
    pub blocks: usize,
    pub n_lin: usize,
    pub objective: Vec<Option<CMatrix>>,
    pub objective_lin: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct HermitianSolution {
    pub status: IpmStatus,
    pub blocks: Vec<CMatrix>,
    pub lin: Vec<f64>,
    /// Lagrange multipliers in the maximization convention: nonnegative for
    /// inequality rows, free for equalities. For an infeasible program this
    /// holds the normalized improving ray instead.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub rel_gap: f64,
}

fn embed(a: &CMatrix) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

fn compress(y: &DMatrix<f64>) -> CMatrix {
    let n = y.nrows() / 2;
    let m = CMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
        let im = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
        C64::new(re, im)
    });
    (&m + m.adjoint()) * C64::from(0.5)
}

struct Scaled {
    problem: ConicProblem,
    row_scale: Vec<f64>,
    objective_scale: f64,
}

impl HermitianProgram {
    fn herm_part(&self, coeffs: &[Option<CMatrix>]) -> Vec<DMatrix<f64>> {
        (0..self.blocks)
            .map(|b| match coeffs.get(b).and_then(|c| c.as_ref()) {
                Some(a) => embed(a) * 0.5,
                None => DMatrix::zeros(2 * self.dim, 2 * self.dim),
            })
            .collect()
    }

    fn slack_count(&self) -> usize {
        self.rows.iter().filter(|r| r.sense != Sense::Eq).count()
    }

    fn to_conic(&self) -> Scaled {
        let n_slack = self.slack_count();
        let n_lin = self.n_lin + n_slack;
        let dims = vec![2 * self.dim; self.blocks];

        let mut c = BlockVec {
            psd: self.herm_part(&self.objective).into_iter().map(|m| -m).collect(),
            lin: DVector::zeros(n_lin),
        };
        for (i, &v) in self.objective_lin.iter().enumerate() {
            c.lin[i] = -v;
        }
        let cn = c.norm();
        let objective_scale = if cn > 0.0 { 1.0 / cn } else { 1.0 };
        c = c.scaled(objective_scale);

        let mut a = Vec::with_capacity(self.rows.len());
        let mut b = DVector::zeros(self.rows.len());
        let mut row_scale = Vec::with_capacity(self.rows.len());
        let mut slack = self.n_lin;
        for (i, row) in self.rows.iter().enumerate() {
            let mut ai = BlockVec {
                psd: self.herm_part(&row.herm),
                lin: DVector::zeros(n_lin),
            };
            for (j, &v) in row.lin.iter().enumerate() {
                ai.lin[j] = v;
            }
            let norm = ai.norm();
            let s = if norm > 0.0 { 1.0 / norm } else { 1.0 };
            ai = ai.scaled(s);
            match row.sense {
                Sense::Ge => {
                    ai.lin[slack] = -1.0;
                    slack += 1;
                }
                Sense::Le => {
                    ai.lin[slack] = 1.0;
                    slack += 1;
                }
                Sense::Eq => {}
            }
            b[i] = row.rhs * s;
            row_scale.push(s);
            a.push(ai);
        }
        Scaled {
            problem: ConicProblem { psd_dims: dims, n_lin, c, a, b },
            row_scale,
            objective_scale,
        }
    }

    /// Plain-text listing of the (row-equilibrated) real conic program.
    pub fn listing(&self) -> String {
        self.to_conic().problem.to_listing()
    }

    /// Value of the objective at a given point.
    pub fn objective_value(&self, blocks: &[CMatrix], lin: &[f64]) -> f64 {
        let mut v: f64 = self.objective_lin.iter().zip(lin).map(|(c, t)| c * t).sum();
        for (cb, xb) in self.objective.iter().zip(blocks) {
            if let Some(cb) = cb {
                v += trace_product(cb, xb);
            }
        }
        v
    }

    /// Left-hand side of row `i` at a given point.
    pub fn row_value(&self, i: usize, blocks: &[CMatrix], lin: &[f64]) -> f64 {
        let row = &self.rows[i];
        let mut v: f64 = row.lin.iter().zip(lin).map(|(c, t)| c * t).sum();
        for (cb, xb) in row.herm.iter().zip(blocks) {
            if let Some(cb) = cb {
                v += trace_product(cb, xb);
            }
        }
        v
    }

    pub fn solve(&self, settings: &IpmSettings) -> HermitianSolution {
        let scaled = self.to_conic();
        let sol = ipm::solve(&scaled.problem, settings);

        let blocks: Vec<CMatrix> = sol.x.psd.iter().map(compress).collect();
        let lin: Vec<f64> = sol.x.lin.iter().take(self.n_lin).copied().collect();
        let sign = |r: &Row| if r.sense == Sense::Le { -1.0 } else { 1.0 };
        let mut duals: Vec<f64> = self
            .rows
            .iter()
            .zip(&scaled.row_scale)
            .zip(sol.y.iter())
            .map(|((row, s), y)| sign(row) * y * s)
            .collect();
        match sol.status {
            IpmStatus::PrimalInfeasible => {
                let n = duals.iter().map(|d| d * d).sum::<f64>().sqrt();
                if n > 0.0 {
                    duals.iter_mut().for_each(|d| *d /= n);
                }
            }
            _ => duals.iter_mut().for_each(|d| *d /= scaled.objective_scale),
        }
        let objective = self.objective_value(&blocks, &lin);
        HermitianSolution {
            status: sol.status,
            blocks,
            lin,
            duals,
            objective,
            iterations: sol.iterations,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            rel_gap: sol.rel_gap,
        }
    }
}
