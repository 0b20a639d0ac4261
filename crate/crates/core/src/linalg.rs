//! Small dense linear-algebra helpers shared by the DMD and approximation
//! entropy modules: Hermitian eigendecompositions, pseudo-inverse solves
//! against Gram matrices, and the generalized eigenvalue problem
//! `lambda_max(S, G)` restricted to the range of `G`.
//!
//! Gram matrices of real dictionaries (indicator functions, shift
//! coordinates) are detected and routed through the real symmetric path,
//! which is noticeably faster for the large Gram matrices the orbit-growth
//! routines produce.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Relative singular-value cutoff used for rank decisions throughout.
pub const RANK_REL_TOL: f64 = 1e-10;

fn is_real(m: &DMatrix<Complex64>) -> bool {
    let scale = m.iter().map(|z| z.norm_sqr()).fold(0.0_f64, f64::max).sqrt();
    let tol = 1e-14 * scale.max(1.0);
    m.iter().all(|z| z.im.abs() <= tol)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns, in
/// the same order as the eigenvalues.
pub fn hermitian_eig_desc(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let (mut vals, mut vecs) = if is_real(m) {
        let re = DMatrix::from_fn(n, n, |i, j| m[(i, j)].re);
        let eig = re.symmetric_eigen();
        let vecs = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), vecs)
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vecs.set_column(dst, &vecs.column(src));
    }
    vals = sorted_vals;
    vecs = sorted_vecs;
    (vals, vecs)
}

/// Solve `gram * x = rhs` in the least-squares sense through the spectral
/// pseudo-inverse of the Hermitian PSD `gram`. Returns the solution and the
/// numerical rank (eigenvalues above `RANK_REL_TOL * lambda_max` count).
pub fn pinv_solve(
    gram: &DMatrix<Complex64>,
    rhs: &DVector<Complex64>,
    rel_tol: f64,
) -> (DVector<Complex64>, usize) {
    let (vals, vecs) = hermitian_eig_desc(gram);
    let cutoff = vals.first().copied().unwrap_or(0.0).max(0.0) * rel_tol;
    let mut x = DVector::zeros(gram.ncols());
    let mut rank = 0;
    for (i, &lam) in vals.iter().enumerate() {
        if lam <= cutoff || lam <= 0.0 {
            continue;
        }
        rank += 1;
        let v = vecs.column(i);
        let proj = v.dotc(rhs); // v^H rhs
        x += v * (proj / Complex64::new(lam, 0.0));
    }
    (x, rank)
}

/// Spectral pseudo-inverse of a Hermitian PSD matrix.
pub fn pinv(gram: &DMatrix<Complex64>, rel_tol: f64) -> (DMatrix<Complex64>, usize) {
    let (vals, vecs) = hermitian_eig_desc(gram);
    let n = gram.nrows();
    let cutoff = vals.first().copied().unwrap_or(0.0).max(0.0) * rel_tol;
    let mut out = DMatrix::zeros(n, n);
    let mut rank = 0;
    for (i, &lam) in vals.iter().enumerate() {
        if lam <= cutoff || lam <= 0.0 {
            continue;
        }
        rank += 1;
        let v = vecs.column(i);
        out += (&v * v.adjoint()) / Complex64::new(lam, 0.0);
    }
    (out, rank)
}

/// Largest generalized eigenvalue of the Hermitian pencil `(S, G)` with `G`
/// PSD, restricted to the range of `G`: directions of zero `G`-norm carry no
/// function and are excluded. Returns 0 for an identically zero pencil.
pub fn gen_eig_max_psd(s: &DMatrix<Complex64>, g: &DMatrix<Complex64>, rel_tol: f64) -> f64 {
    let (gvals, gvecs) = hermitian_eig_desc(g);
    let cutoff = gvals.first().copied().unwrap_or(0.0).max(0.0) * rel_tol;
    let kept: Vec<usize> = (0..gvals.len())
        .filter(|&i| gvals[i] > cutoff && gvals[i] > 0.0)
        .collect();
    if kept.is_empty() {
        return 0.0;
    }
    // Whitening basis W = V_r diag(lambda^{-1/2}); problem becomes ordinary
    // Hermitian eigenvalue problem for W^H S W.
    let n = g.nrows();
    let mut w = DMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        let scale = Complex64::new(1.0 / gvals[i].sqrt(), 0.0);
        w.set_column(col, &(gvecs.column(i) * scale));
    }
    let b = w.adjoint() * s * &w;
    let (bvals, _) = hermitian_eig_desc(&b);
    bvals.first().copied().unwrap_or(0.0)
}

/// `m^k` by repeated multiplication (horizons here are small).
pub fn matrix_power(m: &DMatrix<Complex64>, k: usize) -> DMatrix<Complex64> {
    let n = m.nrows();
    let mut out = DMatrix::identity(n, n);
    for _ in 0..k {
        out = &out * m;
    }
    out
}
