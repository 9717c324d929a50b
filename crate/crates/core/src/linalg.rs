//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here is a thin layer over `nalgebra` that pins down the
//! conventions the optimizers rely on: eigenvalues sorted in descending
//! order, a deterministic eigenvector phase, and null-space bases certified
//! against a relative singular-value tolerance.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative singular-value cutoff used when no explicit tolerance is given.
///
/// Dual matrices coming out of the interior-point solver carry residuals of
/// roughly `1e-8`, so exact zeros are blurred at about that scale.
pub const DEFAULT_NULL_TOL: f64 = 1e-7;

/// Symmetry tolerance accepted by [`hermitian_evd`], relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

const EVD_MAX_ITER: usize = 10_000;

/// Eigendecomposition `A = V diag(values) V^H` of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEvd {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors stored as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEvd {
    /// Largest eigenvalue and its eigenvector.
    pub fn top(&self) -> (f64, CVector) {
        (self.values[0], self.vectors.column(0).into_owned())
    }

    /// Number of eigenvalues strictly above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&v| v > threshold).count()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let n = self.vectors.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (j, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(j);
            out += (v * v.adjoint()) * C64::from(lam);
        }
        out
    }
}

/// Orthonormal basis of an (approximate) null space.
#[derive(Debug, Clone, PartialEq)]
pub struct NullspaceBasis {
    /// `n x d` matrix with orthonormal columns; `d` may be zero.
    pub basis: CMatrix,
    /// Relative singular-value tolerance that produced the basis.
    pub rel_tol: f64,
}

impl NullspaceBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.ncols() == 0
    }
}

pub(crate) fn ensure_finite(a: &CMatrix, what: &str) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::validation(format!("{what} has non-finite entries")))
    }
}

fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Rotates `v` so that its largest-magnitude entry (first one on ties) is
/// real and positive.
pub fn normalize_phase(v: &mut CVector) {
    let mut best = 0usize;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let rot = v[best].conj() / best_mag;
        v.iter_mut().for_each(|z| *z *= rot);
        v[best] = C64::new(v[best].re, 0.0);
    }
}

/// Eigendecomposition of a Hermitian matrix with descending eigenvalues and
/// phase-normalized eigenvectors. Ties keep the solver's order.
pub fn hermitian_evd(a: &CMatrix) -> Result<HermitianEvd> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::validation(format!(
            "eigendecomposition needs a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a, "matrix")?;
    let skew = max_abs(&(a - a.adjoint()));
    if skew > HERMITIAN_TOL * max_abs(a).max(1.0) {
        return Err(Error::validation(format!(
            "matrix is not Hermitian (max |A - A^H| = {skew:e})"
        )));
    }
    let sym = (a + a.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, EVD_MAX_ITER).ok_or(
        Error::NoConvergence {
            what: "Hermitian eigendecomposition",
            iterations: EVD_MAX_ITER,
        },
    )?;

    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps first-index order among equal eigenvalues
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut v: CVector = eig.eigenvectors.column(src).into_owned();
        let norm = v.norm();
        if norm > 0.0 {
            v /= C64::from(norm);
        }
        normalize_phase(&mut v);
        vectors.set_column(dst, &v);
    }
    Ok(HermitianEvd { values, vectors })
}

/// Largest eigenvalue of a Hermitian matrix and its unit eigenvector.
pub fn top_eigenpair(a: &CMatrix) -> Result<(f64, CVector)> {
    Ok(hermitian_evd(a)?.top())
}

/// Singular values (descending) and the full right singular basis of `a`.
fn full_right_svd(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let (rows, cols) = a.shape();
    // pad to at least square so the thin SVD still returns all of V
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::try_new(padded, false, true, f64::EPSILON, EVD_MAX_ITER).ok_or(
        Error::NoConvergence {
            what: "singular value decomposition",
            iterations: EVD_MAX_ITER,
        },
    )?;
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = CMatrix::zeros(cols, order.len());
    for (dst, &src) in order.iter().enumerate() {
        let col: CVector = v_t.row(src).adjoint();
        v.set_column(dst, &col);
    }
    Ok((sv, v))
}

/// Orthonormal basis of `{x : ||A x|| <= rel_tol * sigma_max(A) * ||x||}`.
///
/// A full-rank `A` yields an empty basis; the zero matrix yields the identity.
pub fn nullspace(a: &CMatrix, rel_tol: f64) -> Result<NullspaceBasis> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::validation(format!(
            "null-space tolerance must lie in (0,1), got {rel_tol}"
        )));
    }
    if a.ncols() == 0 || a.nrows() == 0 {
        return Err(Error::validation("null space of an empty matrix"));
    }
    ensure_finite(a, "matrix")?;
    let (sv, v) = full_right_svd(a)?;
    let sigma_max = sv[0];
    let cutoff = rel_tol * sigma_max;
    let null_cols: Vec<usize> = (0..sv.len())
        .filter(|&i| sigma_max == 0.0 || sv[i] <= cutoff)
        .collect();
    let mut basis = CMatrix::zeros(a.ncols(), null_cols.len());
    for (dst, &src) in null_cols.iter().enumerate() {
        let mut col: CVector = v.column(src).into_owned();
        normalize_phase(&mut col);
        basis.set_column(dst, &col);
    }
    Ok(NullspaceBasis { basis, rel_tol })
}

/// Projector `I - B B^H` onto the orthogonal complement of the basis.
pub fn orth_complement_projector(basis: &NullspaceBasis) -> CMatrix {
    let n = basis.ambient_dim();
    let b = &basis.basis;
    CMatrix::identity(n, n) - b * b.adjoint()
}

/// Right null space of a `K x M` channel matrix with `K < M`, i.e. the last
/// `M - rank(G)` right singular vectors.
pub fn svd_right_null(g: &CMatrix) -> Result<NullspaceBasis> {
    if g.nrows() >= g.ncols() {
        return Err(Error::SchemeInapplicable {
            scheme: "sub1",
            reason: format!(
                "the {} energy-receiver channels span all {} antennas, leaving no null space",
                g.nrows(),
                g.ncols()
            ),
        });
    }
    nullspace(g, DEFAULT_NULL_TOL)
}

/// `v v^H`.
pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// `Re Tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)] * b[(j, i)];
            acc += x.re;
        }
    }
    acc
}

pub fn trace_re(a: &CMatrix) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// `|u^H v|^2`.
pub fn abs_inner_sq(u: &CVector, v: &CVector) -> f64 {
    u.dotc(v).norm_sqr()
}

/// Builds a complex vector from `[re, im]` pairs.
pub fn cvector_from_pairs(pairs: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(pairs.len(), pairs.iter().map(|p| C64::new(p[0], p[1])))
}

pub fn cvector_to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = random_matrix(n, n, rng);
        (&a + a.adjoint()) * c(0.5, 0.0)
    }

    #[test]
    fn identity_eigenvalues_and_tie_order() {
        let evd = hermitian_evd(&CMatrix::identity(2, 2)).unwrap();
        assert_eq!(evd.values, vec![1.0, 1.0]);
        let gram = evd.vectors.adjoint() * &evd.vectors;
        assert!((gram - CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn diagonal_matrix_eigenpairs() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(3.0, 0.0)]));
        let evd = hermitian_evd(&a).unwrap();
        assert_eq!(evd.values, vec![3.0, 1.0]);
        assert!((evd.vectors.column(0)[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((evd.vectors.column(1)[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = CMatrix::identity(2, 2);
        a[(0, 1)] = c(0.0, 1.0);
        assert!(matches!(hermitian_evd(&a), Err(Error::Validation(_))));
    }

    #[test]
    fn random_reconstruction_and_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2, 4, 8] {
            let a = random_hermitian(n, &mut rng);
            let evd = hermitian_evd(&a).unwrap();
            assert!((evd.reconstruct() - &a).norm() <= 1e-10 * a.norm());
            let gram = evd.vectors.adjoint() * &evd.vectors;
            assert!((gram - CMatrix::identity(n, n)).norm() < 1e-10);
            assert!(evd.values.windows(2).all(|w| w[0] >= w[1]));
            for j in 0..n {
                let col = evd.vectors.column(j);
                let (idx, _) = col
                    .iter()
                    .enumerate()
                    .fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
                assert_eq!(col[idx].im, 0.0);
                assert!(col[idx].re > 0.0);
            }
            // bit-identical on repeat
            assert_eq!(hermitian_evd(&a).unwrap(), evd);
        }
    }

    #[test]
    fn nullspace_of_rank_one_projector() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(1.0, 0.0);
        let ns = nullspace(&a, DEFAULT_NULL_TOL).unwrap();
        assert_eq!(ns.dim(), 1);
        assert!((ns.basis[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(ns.basis[(0, 0)].norm() < 1e-14);
    }

    #[test]
    fn nullspace_of_nonsingular_is_empty() {
        let a = CMatrix::from_fn(2, 2, |i, j| c((i + 2 * j + 1) as f64, 0.0));
        assert!(nullspace(&a, DEFAULT_NULL_TOL).unwrap().is_empty());
    }

    #[test]
    fn nullspace_rejects_bad_tolerance() {
        let a = CMatrix::identity(2, 2);
        assert!(nullspace(&a, 0.0).is_err());
        assert!(nullspace(&a, 1.0).is_err());
    }

    #[test]
    fn nullspace_of_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g: CVector = random_matrix(4, 1, &mut rng).column(0).into_owned();
        let a = outer(&g);
        let ns = nullspace(&a, DEFAULT_NULL_TOL).unwrap();
        assert_eq!(ns.dim(), 3);
        for j in 0..3 {
            let x: CVector = ns.basis.column(j).into_owned();
            assert!((&a * &x).norm() <= 1e-12 * a.norm());
            assert!(g.dotc(&x).norm() <= 1e-12 * g.norm());
        }
        let gram = ns.basis.adjoint() * &ns.basis;
        assert!((gram - CMatrix::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn projector_cases() {
        let empty = NullspaceBasis { basis: CMatrix::zeros(3, 0), rel_tol: 1e-7 };
        assert_eq!(orth_complement_projector(&empty), CMatrix::identity(3, 3));

        let mut e1 = CMatrix::zeros(2, 1);
        e1[(0, 0)] = c(1.0, 0.0);
        let p = orth_complement_projector(&NullspaceBasis { basis: e1, rel_tol: 1e-7 });
        let expect = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        assert_eq!(p, expect);
    }

    #[test]
    fn projector_identities_on_random_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_matrix(2, 5, &mut rng);
        let ns = nullspace(&g, DEFAULT_NULL_TOL).unwrap();
        let p = orth_complement_projector(&ns);
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!((&p - p.adjoint()).norm() < 1e-12);
        assert!((&p * &ns.basis).norm() < 1e-12);
    }

    #[test]
    fn svd_null_of_single_row() {
        let g = CMatrix::from_row_slice(1, 2, &[c(0.0, 0.0), c(1.0, 0.0)]);
        let ns = svd_right_null(&g).unwrap();
        assert_eq!(ns.dim(), 1);
        assert!((ns.basis[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn svd_null_with_repeated_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let row = random_matrix(1, 4, &mut rng);
        let mut g = CMatrix::zeros(2, 4);
        g.set_row(0, &row.row(0));
        g.set_row(1, &row.row(0));
        // independent rank test: G G^H is 2x2 with determinant zero
        let gram = &g * g.adjoint();
        let det = gram[(0, 0)] * gram[(1, 1)] - gram[(0, 1)] * gram[(1, 0)];
        assert!(det.norm() < 1e-12 * gram.norm().powi(2));
        let ns = svd_right_null(&g).unwrap();
        assert_eq!(ns.dim(), 3);
        assert!((&g * &ns.basis).norm() < 1e-12);
    }

    #[test]
    fn svd_null_of_full_rank_wide_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_matrix(3, 4, &mut rng);
        let ns = svd_right_null(&g).unwrap();
        assert_eq!(ns.dim(), 1);
        assert!((&g * &ns.basis).norm() <= 1e-10);
    }

    #[test]
    fn svd_null_rejects_tall_or_square() {
        let g = CMatrix::identity(3, 3);
        assert!(matches!(svd_right_null(&g), Err(Error::SchemeInapplicable { .. })));
    }
}
