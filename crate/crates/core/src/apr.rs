//! Approximation entropy: certified brackets for `H_apr(omega, delta)`,
//! orbit-growth slopes, delay dictionaries, and the delay-subspace
//! dimension-bound harness.
//!
//! Computing `H_apr` exactly is a max-column-error low-rank approximation
//! problem, so instead of point estimates every routine returns a bracket
//! `[d_lo, d_hi]`:
//!
//! * `d_lo` is sound because any subspace of dimension `d` whose worst
//!   column residual is below `delta` keeps the total squared residual
//!   under `|omega| delta^2`, which the Gram spectrum bounds from below
//!   by its eigenvalue tail; an orthonormal subset of size `r` raises the
//!   bound to `ceil(r (1 - delta^2))`.
//! * `d_hi` comes with an explicit witness basis (from the dominant
//!   eigenspace or a greedy residual sweep, whichever lands lower) whose
//!   worst column residual is strictly below `delta` minus a guard.
//!
//! Everything works off Gram matrices, so orbits of large dictionaries
//! never materialize coordinate charts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dmd::{DmdModel, KoopmanDictionary, Verdict};
use crate::error::{Error, Result};
use crate::linalg;

/// Strictness guard under the threshold for witness residuals.
const DELTA_GUARD: f64 = 1e-12;
/// Gram deviation tolerance for orthonormal-subset detection.
const ORTHO_TOL: f64 = 1e-10;

/// A finite set of Hilbert-space vectors, represented by its Gram matrix.
/// Coordinates, when supplied, are over an orthonormal chart, so the Gram
/// matrix reproduces the ambient inner products.
#[derive(Debug, Clone)]
pub struct VectorSet {
    gram: DMatrix<Complex64>,
}

impl VectorSet {
    /// From explicit columns over an orthonormal chart.
    pub fn from_columns(columns: &DMatrix<Complex64>) -> VectorSet {
        VectorSet { gram: columns.adjoint() * columns }
    }

    /// From a precomputed Gram matrix (must be Hermitian PSD).
    pub fn from_gram(gram: DMatrix<Complex64>) -> VectorSet {
        VectorSet { gram }
    }

    pub fn len(&self) -> usize {
        self.gram.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.gram.nrows() == 0
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }
}

/// Certified bracket `H_apr(omega, delta) in [d_lo, d_hi]`.
#[derive(Debug, Clone)]
pub struct AprBracket {
    pub d_lo: usize,
    pub d_hi: usize,
    pub delta: f64,
    /// Basis achieving `d_hi`, as coefficient columns over the vector set,
    /// together with its verified worst column residual.
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone)]
pub struct Witness {
    /// Kernel coefficients: basis vector `j` is `sum_c coeffs[(c, j)] x_c`.
    pub coeffs: DMatrix<Complex64>,
    /// Verified `max_c || x_c - P x_c ||`.
    pub max_residual: f64,
}

/// Bracket `H_apr(omega, delta)` for a finite vector set.
pub fn h_apr_point(vs: &VectorSet, delta: f64) -> Result<AprBracket> {
    if delta <= 0.0 {
        return Err(Error::DeltaNonPositive(delta));
    }
    if vs.is_empty() {
        return Ok(AprBracket { d_lo: 0, d_hi: 0, delta, witness: None });
    }
    // Work on the deduplicated set: H_apr is a function of the set, and
    // duplicates would loosen both sides of the bracket.
    let keep = dedup_indices(vs.gram());
    let k = sub_gram(vs.gram(), &keep);
    let n = keep.len();

    let (mut eigvals, eigvecs) = linalg::hermitian_eig_desc(&k);
    for v in &mut eigvals {
        *v = v.max(0.0);
    }

    // Eigenvalue-tail lower bound: a feasible d-dimensional subspace needs
    // tail(d) < n delta^2.
    let budget = n as f64 * delta * delta;
    let mut tail: Vec<f64> = vec![0.0; n + 1];
    for d in (0..n).rev() {
        tail[d] = tail[d + 1] + eigvals[d];
    }
    let mut d_lo = (0..=n).find(|&d| tail[d] < budget).unwrap_or(n);

    // Orthonormal-subset lower bound.
    let r = greedy_orthonormal_count(&k);
    if r > 0 {
        let bound = (r as f64 * (1.0 - delta * delta) - 1e-9).ceil().max(0.0) as usize;
        d_lo = d_lo.max(bound);
    }

    // Upper bounds with explicit witnesses.
    let threshold_sq = {
        let t = (delta - DELTA_GUARD).max(0.0);
        t * t
    };
    let svd_candidate = svd_upper_bound(&k, &eigvals, &eigvecs, threshold_sq);
    let greedy_candidate = greedy_upper_bound(&k, threshold_sq);
    let (d_hi, coeffs) = match (svd_candidate, greedy_candidate) {
        (Some((ds, cs)), Some((dg, cg))) => {
            if ds <= dg {
                (ds, cs)
            } else {
                (dg, cg)
            }
        }
        (Some((ds, cs)), None) => (ds, cs),
        (None, Some((dg, cg))) => (dg, cg),
        (None, None) => {
            return Err(Error::InvalidParameter(
                "no feasible witness subspace found (numerical breakdown)".into(),
            ))
        }
    };

    let max_residual = max_residual_sq(&k, &coeffs).sqrt();
    debug_assert!(max_residual < delta, "witness residual {max_residual} >= {delta}");
    let d_lo = d_lo.min(d_hi);
    Ok(AprBracket { d_lo, d_hi, delta, witness: Some(Witness { coeffs, max_residual }) })
}

fn dedup_indices(gram: &DMatrix<Complex64>) -> Vec<usize> {
    let n = gram.nrows();
    let scale = (0..n).map(|i| gram[(i, i)].re).fold(1.0_f64, f64::max);
    let tol_sq = 1e-24 * scale;
    let mut keep: Vec<usize> = Vec::new();
    for c in 0..n {
        let dup = keep.iter().any(|&p| {
            let d2 = gram[(c, c)].re + gram[(p, p)].re - 2.0 * gram[(p, c)].re;
            d2 <= tol_sq
        });
        if !dup {
            keep.push(c);
        }
    }
    keep
}

fn sub_gram(gram: &DMatrix<Complex64>, keep: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(keep.len(), keep.len(), |i, j| gram[(keep[i], keep[j])])
}

/// Greedy scan for a large orthonormal subset of the columns.
fn greedy_orthonormal_count(gram: &DMatrix<Complex64>) -> usize {
    let n = gram.nrows();
    let mut selected: Vec<usize> = Vec::new();
    for c in 0..n {
        if (gram[(c, c)].re - 1.0).abs() > ORTHO_TOL {
            continue;
        }
        if selected.iter().all(|&s| gram[(s, c)].norm() <= ORTHO_TOL) {
            selected.push(c);
        }
    }
    selected.len()
}

/// Residuals squared of every column against the span of the orthonormal
/// kernel basis `coeffs` (columns beta_j with beta_i^H K beta_j = delta_ij).
fn residuals_sq(gram: &DMatrix<Complex64>, coeffs: &DMatrix<Complex64>) -> Vec<f64> {
    let n = gram.nrows();
    // gamma_j = beta_j^H K, one row per basis vector.
    let gamma = coeffs.adjoint() * gram;
    (0..n)
        .map(|c| {
            let mut r = gram[(c, c)].re;
            for j in 0..coeffs.ncols() {
                r -= gamma[(j, c)].norm_sqr();
            }
            r.max(0.0)
        })
        .collect()
}

fn max_residual_sq(gram: &DMatrix<Complex64>, coeffs: &DMatrix<Complex64>) -> f64 {
    residuals_sq(gram, coeffs).into_iter().fold(0.0, f64::max)
}

/// Least dominant-eigenspace dimension whose worst column residual clears
/// the threshold. Returns the kernel coefficients of the basis.
fn svd_upper_bound(
    gram: &DMatrix<Complex64>,
    eigvals: &[f64],
    eigvecs: &DMatrix<Complex64>,
    threshold_sq: f64,
) -> Option<(usize, DMatrix<Complex64>)> {
    let n = gram.nrows();
    // res^2(c, d) = K_cc - sum_{i<d} lambda_i |v_{i,c}|^2, accumulated
    // incrementally over d.
    let mut residual: Vec<f64> = (0..n).map(|c| gram[(c, c)].re).collect();
    let build = |d: usize| -> DMatrix<Complex64> {
        DMatrix::from_fn(n, d, |c, j| eigvecs[(c, j)] / Complex64::new(eigvals[j].sqrt(), 0.0))
    };
    if residual.iter().all(|&r| r < threshold_sq) {
        return Some((0, DMatrix::zeros(n, 0)));
    }
    for d in 0..n {
        if eigvals[d] <= 0.0 {
            break;
        }
        for c in 0..n {
            residual[c] -= eigvals[d] * eigvecs[(c, d)].norm_sqr();
        }
        if residual.iter().all(|&r| r < threshold_sq) {
            return Some((d + 1, build(d + 1)));
        }
    }
    None
}

/// Greedy residual sweep: repeatedly adjoin the normalized residual of the
/// worst column until every residual clears the threshold.
fn greedy_upper_bound(
    gram: &DMatrix<Complex64>,
    threshold_sq: f64,
) -> Option<(usize, DMatrix<Complex64>)> {
    let n = gram.nrows();
    let mut coeffs = DMatrix::<Complex64>::zeros(n, 0);
    // Rows gamma_j = beta_j^H K, maintained incrementally.
    let mut gamma = DMatrix::<Complex64>::zeros(0, n);
    let mut residual: Vec<f64> = (0..n).map(|c| gram[(c, c)].re).collect();
    for _round in 0..n {
        let (worst, &worst_sq) = residual
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if worst_sq < threshold_sq {
            return Some((coeffs.ncols(), coeffs));
        }
        if worst_sq <= 0.0 {
            return None;
        }
        // beta_new = (e_worst - sum_j <beta_j, x_worst> beta_j) / res.
        let res = worst_sq.sqrt();
        let mut beta = DVector::<Complex64>::zeros(n);
        beta[worst] = Complex64::new(1.0, 0.0);
        for j in 0..coeffs.ncols() {
            let overlap = gamma[(j, worst)];
            for c in 0..n {
                beta[c] -= overlap * coeffs[(c, j)];
            }
        }
        beta /= Complex64::new(res, 0.0);
        let new_gamma = (beta.adjoint() * gram).transpose();
        coeffs = {
            let mut next = DMatrix::zeros(n, coeffs.ncols() + 1);
            next.view_mut((0, 0), (n, coeffs.ncols())).copy_from(&coeffs);
            next.set_column(coeffs.ncols(), &beta);
            next
        };
        gamma = {
            let mut next = DMatrix::zeros(gamma.nrows() + 1, n);
            next.view_mut((0, 0), (gamma.nrows(), n)).copy_from(&gamma);
            next.set_row(gamma.nrows(), &new_gamma.transpose());
            next
        };
        for c in 0..n {
            residual[c] = (residual[c] - new_gamma[c].norm_sqr()).max(0.0);
        }
    }
    if residual.iter().all(|&r| r < threshold_sq) {
        Some((coeffs.ncols(), coeffs))
    } else {
        None
    }
}

/// Gram matrix of the orbit `union_{k<n} T^k omega` of a dictionary, with
/// columns normalized to unit vectors. Uses that the Koopman operator is
/// an isometry, so block `(i, j)` is the lag `j - i` cross matrix.
pub fn orbit_gram(dict: &dyn KoopmanDictionary, n: usize) -> Result<DMatrix<Complex64>> {
    let d = dict.dim();
    let base = dict.cross(0)?;
    let scales: Vec<f64> = (0..d)
        .map(|i| {
            let g = base[(i, i)].re;
            if g > 0.0 {
                1.0 / g.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut crosses = Vec::with_capacity(n);
    for lag in 0..n {
        let mut c = dict.cross(lag)?;
        for i in 0..d {
            for j in 0..d {
                c[(i, j)] *= scales[i] * scales[j];
            }
        }
        crosses.push(c);
    }
    let total = n * d;
    let mut gram = DMatrix::zeros(total, total);
    for bi in 0..n {
        for bj in bi..n {
            let c = &crosses[bj - bi];
            for a in 0..d {
                for b in 0..d {
                    gram[(bi * d + a, bj * d + b)] = c[(a, b)];
                    gram[(bj * d + b, bi * d + a)] = c[(a, b)].conj();
                }
            }
        }
    }
    Ok(gram)
}

/// Bracket sequence for the orbit `omega_n = union_{k<n} T^k omega` and the
/// induced slope bracket `(last d_lo / n_max, min_n d_hi / n)`.
#[derive(Debug, Clone)]
pub struct OrbitGrowth {
    pub per_n: Vec<AprBracket>,
    pub slope_lo: f64,
    pub slope_hi: f64,
    pub delta: f64,
}

pub fn orbit_growth(
    dict: &dyn KoopmanDictionary,
    delta: f64,
    n_max: usize,
    col_budget: usize,
) -> Result<OrbitGrowth> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("orbit growth needs n_max >= 1".into()));
    }
    let d = dict.dim();
    if n_max * d > col_budget {
        return Err(Error::ChartOverflow { chart: col_budget, requested: n_max * d });
    }
    let full = orbit_gram(dict, n_max)?;
    let mut per_n = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let sub = full.view((0, 0), (n * d, n * d)).clone_owned();
        per_n.push(h_apr_point(&VectorSet::from_gram(sub), delta)?);
    }
    let slope_lo = per_n.last().unwrap().d_lo as f64 / n_max as f64;
    let slope_hi = per_n
        .iter()
        .enumerate()
        .map(|(i, b)| b.d_hi as f64 / (i + 1) as f64)
        .fold(f64::MAX, f64::min);
    Ok(OrbitGrowth { per_n, slope_lo, slope_hi, delta })
}

/// Delay dictionary: the `(order+1) * dim F` generators `T^k psi_a`,
/// `k = 0..=order`, exposing exact cross matrices derived from the base
/// dictionary. Cross matrices are cached up to `order + max_lag`.
pub struct DelayDictionary {
    base_cross: Vec<DMatrix<Complex64>>,
    dim_base: usize,
    order: usize,
    name: String,
}

impl DelayDictionary {
    pub fn new(base: &dyn KoopmanDictionary, order: usize, max_lag: usize) -> Result<Self> {
        let mut base_cross = Vec::with_capacity(order + max_lag + 1);
        for lag in 0..=(order + max_lag) {
            base_cross.push(base.cross(lag)?);
        }
        Ok(DelayDictionary {
            base_cross,
            dim_base: base.dim(),
            order,
            name: format!("delay[{}; order {}]", base.label(), order),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Rank of the delay Gram matrix: the dimension of the delay subspace.
    pub fn rank(&self) -> Result<usize> {
        let gram = self.cross(0)?;
        let (_, rank) = linalg::pinv(&gram, linalg::RANK_REL_TOL);
        Ok(rank)
    }
}

impl KoopmanDictionary for DelayDictionary {
    fn dim(&self) -> usize {
        (self.order + 1) * self.dim_base
    }

    fn cross(&self, lag: usize) -> Result<DMatrix<Complex64>> {
        let d = self.dim_base;
        let total = self.dim();
        let mut out = DMatrix::zeros(total, total);
        for i in 0..=self.order {
            for j in 0..=self.order {
                // <T^i psi_a, T^lag T^j psi_b> = <psi_a, T^{lag+j-i} psi_b>.
                let shift = lag as i64 + j as i64 - i as i64;
                for a in 0..d {
                    for b in 0..d {
                        let v = if shift >= 0 {
                            let c = self.base_cross.get(shift as usize).ok_or(
                                Error::HorizonExceeded {
                                    requested: shift as usize,
                                    available: self.base_cross.len() - 1,
                                },
                            )?;
                            c[(a, b)]
                        } else {
                            let c = self.base_cross.get((-shift) as usize).ok_or(
                                Error::HorizonExceeded {
                                    requested: (-shift) as usize,
                                    available: self.base_cross.len() - 1,
                                },
                            )?;
                            c[(b, a)].conj()
                        };
                        out[(i * d + a, j * d + b)] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Report of the delay-subspace dimension-bound harness.
#[derive(Debug, Clone)]
pub struct Theorem31Report {
    pub order: usize,
    pub dim_f: usize,
    pub dim_fn: usize,
    pub delta: f64,
    pub eps: f64,
    /// Lower slope bracket of the base dictionary's orbit growth.
    pub h_lo: f64,
    pub k_max: usize,
    pub k_max_capped: bool,
    /// `k_max * (h_lo - eps)`.
    pub rhs: f64,
    pub verdict: Verdict,
    pub delta_k: Vec<f64>,
    pub f_bracket: (f64, f64),
    pub fn_bracket: (f64, f64),
    pub brackets_overlap: bool,
    /// Sanity: `h_lo <= dim F`.
    pub dim_bound_ok: bool,
}

/// Measure the prediction horizon of the analytic DMD on the delay
/// subspace `F_n` and check `dim F_n >= K_max (h_lo - eps)`, where `h_lo`
/// is the sound side of the base dictionary's slope bracket. Also reports
/// whether the slope brackets of `F` and `F_n` overlap.
pub fn verify_theorem_3_1(
    dict: &dyn KoopmanDictionary,
    eps: f64,
    order: usize,
    delta: f64,
    k_range: usize,
    growth_n_max: usize,
    col_budget: usize,
) -> Result<Theorem31Report> {
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let f_growth = orbit_growth(dict, delta, growth_n_max, col_budget)?;
    let h_lo = f_growth.slope_lo;

    let delay = DelayDictionary::new(dict, order, k_range.max(growth_n_max))?;
    let dim_fn = delay.rank()?;
    let model = DmdModel::analytic(&delay, k_range)?;
    let delta_k = model.error_norms()?;
    let (k_max, k_max_capped) = model.k_max(delta)?;

    let fn_growth = orbit_growth(&delay, delta, growth_n_max.min(col_budget / delay.dim().max(1)).max(1), col_budget)?;

    let rhs = k_max as f64 * (h_lo - eps);
    let verdict = if h_lo - eps <= 0.0 {
        Verdict::EntropyZeroRegime
    } else if dim_fn as f64 >= rhs - 1e-12 {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    let f_bracket = (f_growth.slope_lo, f_growth.slope_hi);
    let fn_bracket = (fn_growth.slope_lo, fn_growth.slope_hi);
    let brackets_overlap = f_bracket.0 <= fn_bracket.1 + 1e-12 && fn_bracket.0 <= f_bracket.1 + 1e-12;
    Ok(Theorem31Report {
        order,
        dim_f: dict.dim(),
        dim_fn,
        delta,
        eps,
        h_lo,
        k_max,
        k_max_capped,
        rhs,
        verdict,
        delta_k,
        f_bracket,
        fn_bracket,
        brackets_overlap,
        dim_bound_ok: h_lo <= dict.dim() as f64 + 1e-9,
    })
}
