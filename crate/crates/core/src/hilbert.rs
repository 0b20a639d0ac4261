//! L^2 machinery over the model systems.
//!
//! Two exact function backends: cell functions (coefficient vectors over a
//! partition) and torus characters. Inner products are conjugate-linear in
//! the first argument, so Gram solves read `G c = b` with
//! `b_i = <psi_i, f>` and the compressed operator is `G^+ A_1`.
//!
//! Conditional expectation, the Markov projection and the orthogonal
//! projection onto `L^2(X | beta)` are the same operator; the tests pin
//! that equivalence numerically.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::partition::{Partition, SamplePool};
use crate::systems::{Cell, System, SystemKind};

/// Element of `L^2(X | alpha)`: one coefficient per cell.
#[derive(Debug, Clone)]
pub struct CellFunction {
    partition: Arc<Partition>,
    coeffs: DVector<Complex64>,
}

impl CellFunction {
    pub fn new(partition: Arc<Partition>, coeffs: DVector<Complex64>) -> Result<Self> {
        if coeffs.len() != partition.cell_count() {
            return Err(Error::RepresentationMismatch(format!(
                "{} coefficients for {} cells",
                coeffs.len(),
                partition.cell_count()
            )));
        }
        Ok(CellFunction { partition, coeffs })
    }

    pub fn from_reals(partition: Arc<Partition>, coeffs: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(coeffs.len(), coeffs.iter().map(|&x| Complex64::new(x, 0.0)));
        CellFunction::new(partition, v)
    }

    /// Indicator of one cell.
    pub fn indicator(partition: Arc<Partition>, cell: usize) -> Self {
        let mut coeffs = DVector::zeros(partition.cell_count());
        coeffs[cell] = Complex64::new(1.0, 0.0);
        CellFunction { partition, coeffs }
    }

    /// The constant function 1.
    pub fn one(partition: Arc<Partition>) -> Self {
        let coeffs = DVector::from_element(partition.cell_count(), Complex64::new(1.0, 0.0));
        CellFunction { partition, coeffs }
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn coeffs(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    /// `<self, other>`, conjugate-linear in `self`; both functions must
    /// live over the same partition.
    pub fn inner(&self, other: &CellFunction) -> Result<Complex64> {
        if !Arc::ptr_eq(&self.partition, &other.partition)
            && self.partition.cell_count() != other.partition.cell_count()
        {
            return Err(Error::RepresentationMismatch(
                "cell functions over different partitions".into(),
            ));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.coeffs.len() {
            acc += self.coeffs[i].conj() * other.coeffs[i] * self.partition.measure(i);
        }
        Ok(acc)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    /// Integral of the function.
    pub fn mean(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.coeffs.len() {
            acc += self.coeffs[i] * self.partition.measure(i);
        }
        acc
    }

    /// Pointwise evaluation through the partition labeler.
    pub fn eval(&self, p: &crate::systems::Point) -> Result<Complex64> {
        Ok(self.coeffs[self.partition.label(p)?])
    }
}

/// Finite combination of torus characters `z^j w^k` with complex
/// amplitudes. Characters are orthonormal, so inner products are amplitude
/// dot products and the Koopman operator acts exactly.
#[derive(Debug, Clone)]
pub struct CharacterFunction {
    terms: BTreeMap<(i64, i64), Complex64>,
}

impl CharacterFunction {
    pub fn character(j: i64, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((j, k), Complex64::new(1.0, 0.0));
        CharacterFunction { terms }
    }

    pub fn from_terms(terms: BTreeMap<(i64, i64), Complex64>) -> Self {
        CharacterFunction { terms }
    }

    pub fn terms(&self) -> &BTreeMap<(i64, i64), Complex64> {
        &self.terms
    }

    /// `<self, other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CharacterFunction) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, a) in &self.terms {
            if let Some(b) = other.terms.get(idx) {
                acc += a.conj() * b;
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// One application of the Koopman operator of `system` (`step = 1`) or
    /// its inverse (`step = -1`).
    fn koopman_step(&self, system: &System, forward: bool) -> Result<CharacterFunction> {
        let mut out: BTreeMap<(i64, i64), Complex64> = BTreeMap::new();
        match system.kind() {
            SystemKind::Rotation { angle } => {
                for (&(j, k), &amp) in &self.terms {
                    if k != 0 {
                        return Err(Error::RepresentationMismatch(
                            "rotation characters carry a single index".into(),
                        ));
                    }
                    let theta = 2.0 * std::f64::consts::PI * angle * j as f64;
                    let phase = if forward {
                        Complex64::from_polar(1.0, theta)
                    } else {
                        Complex64::from_polar(1.0, -theta)
                    };
                    *out.entry((j, 0)).or_insert(Complex64::new(0.0, 0.0)) += amp * phase;
                }
            }
            SystemKind::SkewRotation { angle } => {
                // T (z^j w^k) = e^{i pi alpha j} z^{j+k} w^k and the inverse
                // sends (j, k) to (j - k, k) with phase e^{i pi alpha (k - j)}.
                let a = std::f64::consts::PI * angle;
                for (&(j, k), &amp) in &self.terms {
                    let (idx, theta) = if forward {
                        ((j + k, k), a * j as f64)
                    } else {
                        ((j - k, k), a * (k - j) as f64)
                    };
                    let phase = Complex64::from_polar(1.0, theta);
                    *out.entry(idx).or_insert(Complex64::new(0.0, 0.0)) += amp * phase;
                }
            }
            _ => {
                return Err(Error::UnsupportedOperation {
                    system: system.name(),
                    op: "character dynamics".into(),
                })
            }
        }
        Ok(CharacterFunction { terms: out })
    }

    /// `T^k` applied to the function, exact on character combinations.
    pub fn koopman_pow(&self, system: &System, k: i64) -> Result<CharacterFunction> {
        let mut f = self.clone();
        for _ in 0..k.unsigned_abs() {
            f = f.koopman_step(system, k >= 0)?;
        }
        Ok(f)
    }
}

/// Function representation for the representation-checked inner product.
pub enum Observable {
    Cell(CellFunction),
    Character(CharacterFunction),
}

/// Inner product across representations; mixing representations is an
/// error rather than a silent coercion.
pub fn inner_product(f: &Observable, g: &Observable) -> Result<Complex64> {
    match (f, g) {
        (Observable::Cell(a), Observable::Cell(b)) => a.inner(b),
        (Observable::Character(a), Observable::Character(b)) => Ok(a.inner(b)),
        _ => Err(Error::RepresentationMismatch(
            "cell function paired with character function".into(),
        )),
    }
}

/// `<f, T^k g>` with exact joint measures `mu(A_i intersect phi^{-k} B_j)`.
pub fn koopman_pairing(f: &CellFunction, g: &CellFunction, k: usize) -> Result<Complex64> {
    let system = f.partition().system().clone();
    let unit = system.angle_unit().unwrap_or(0.0);
    let mut pre: Vec<Cell> = g.partition().cells().to_vec();
    for _ in 0..k {
        pre = pre.iter().map(|c| system.cell_preimage(c)).collect::<Result<_>>()?;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, a) in f.partition().cells().iter().enumerate() {
        let ci = f.coeffs()[i].conj();
        if ci == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, b) in pre.iter().enumerate() {
            if let Some(common) = a.intersect(b, unit) {
                let m = system.exact_cell_measure(&common)?.to_f64();
                acc += ci * g.coeffs()[j] * m;
            }
        }
    }
    Ok(acc)
}

/// Conditional expectation `E[f | beta]` as a cell function over `beta`.
///
/// Conditioning cells of measure zero were already dropped when `beta` was
/// built, matching the summation convention.
pub fn conditional_expectation(
    f: &CellFunction,
    beta: &Arc<Partition>,
    budget: usize,
) -> Result<CellFunction> {
    let alpha = f.partition();
    let (joined, parents) = alpha.refine_with_parents(beta, budget)?;
    let mut numerators = vec![Complex64::new(0.0, 0.0); beta.cell_count()];
    for (g, &(ai, bi)) in parents.iter().enumerate() {
        numerators[bi] += f.coeffs()[ai] * joined.measure(g);
    }
    let coeffs = DVector::from_iterator(
        beta.cell_count(),
        numerators.iter().enumerate().map(|(bi, &num)| num / beta.measure(bi)),
    );
    CellFunction::new(beta.clone(), coeffs)
}

/// Both routes to `|| E[1_A | beta] - 1_A ||_1`: the directly integrated
/// L^1 norm and the closed form `2 sum_B mu(A cap B) mu(B \ A) / mu(B)`.
#[derive(Debug, Clone, Copy)]
pub struct L1ProjectionError {
    pub direct: f64,
    pub closed_form: f64,
}

pub fn l1_projection_error(
    system: &Arc<System>,
    a: &Cell,
    beta: &Partition,
) -> Result<L1ProjectionError> {
    let unit = system.angle_unit().unwrap_or(0.0);
    let mu_a_in: Vec<f64> = beta
        .cells()
        .iter()
        .map(|b| -> Result<f64> {
            Ok(match a.intersect(b, unit) {
                Some(c) => system.exact_cell_measure(&c)?.to_f64(),
                None => 0.0,
            })
        })
        .collect::<Result<_>>()?;
    let mut direct = 0.0;
    let mut closed = 0.0;
    for (j, &m_in) in mu_a_in.iter().enumerate() {
        let mu_b = beta.measure(j);
        let m_out = mu_b - m_in;
        let ratio = m_in / mu_b;
        // E[1_A | beta] equals `ratio` on B; integrate |ratio - 1_A|.
        direct += (1.0 - ratio) * m_in + ratio * m_out;
        closed += m_in * m_out / mu_b;
    }
    closed *= 2.0;
    Ok(L1ProjectionError { direct, closed_form: closed })
}

/// Monte-Carlo estimate of the same L^1 norm: evaluate
/// `|E[1_A | beta](x) - 1_A(x)|` on a sample pool. Returns the estimate and
/// its standard error.
pub fn l1_projection_error_monte_carlo(
    system: &Arc<System>,
    a: &Cell,
    beta: &Partition,
    pool: &SamplePool,
) -> Result<(f64, f64)> {
    let unit = system.angle_unit().unwrap_or(0.0);
    let ratios: Vec<f64> = beta
        .cells()
        .iter()
        .enumerate()
        .map(|(j, b)| -> Result<f64> {
            Ok(match a.intersect(b, unit) {
                Some(c) => system.exact_cell_measure(&c)?.to_f64() / beta.measure(j),
                None => 0.0,
            })
        })
        .collect::<Result<_>>()?;
    let n = pool.points.len();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for p in &pool.points {
        let j = beta.label(p)?;
        let in_a = system.cell_contains(a, p)?;
        let v = (ratios[j] - if in_a { 1.0 } else { 0.0 }).abs();
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    Ok((mean, (var / n as f64).sqrt()))
}

/// Least-squares projection coefficients onto a dictionary with Gram
/// matrix `gram`: solves `gram c = rhs` through the spectral
/// pseudo-inverse. Returns the coefficients and the numerical Gram rank.
pub fn orthogonal_project(
    gram: &DMatrix<Complex64>,
    rhs: &DVector<Complex64>,
) -> (DVector<Complex64>, usize) {
    linalg::pinv_solve(gram, rhs, linalg::RANK_REL_TOL)
}

/// Gram matrix of the indicator dictionary of `beta` (diagonal).
pub fn indicator_gram(beta: &Partition) -> DMatrix<Complex64> {
    DMatrix::from_fn(beta.cell_count(), beta.cell_count(), |i, j| {
        if i == j {
            Complex64::new(beta.measure(i), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Right-hand side `b_j = <1_{B_j}, f>` for projecting `f` onto the
/// indicators of `beta`.
pub fn indicator_pairing(
    f: &CellFunction,
    beta: &Arc<Partition>,
    budget: usize,
) -> Result<DVector<Complex64>> {
    let (joined, parents) = f.partition().refine_with_parents(beta, budget)?;
    let mut b = DVector::zeros(beta.cell_count());
    for (g, &(ai, bi)) in parents.iter().enumerate() {
        b[bi] += f.coeffs()[ai] * joined.measure(g);
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::DEFAULT_CELL_BUDGET;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn indicator_inner_products() {
        let p = Arc::new(Partition::dyadic(System::doubling(), 2).unwrap());
        let f = CellFunction::indicator(p.clone(), 0);
        let g = CellFunction::indicator(p.clone(), 1);
        assert_eq!(f.inner(&f).unwrap(), c(0.25, 0.0));
        assert_eq!(f.inner(&g).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn character_orthonormality() {
        let x = CharacterFunction::character(2, 0);
        let y = CharacterFunction::character(3, 0);
        assert_eq!(x.inner(&x), c(1.0, 0.0));
        assert_eq!(x.inner(&y), c(0.0, 0.0));
    }

    #[test]
    fn representation_mismatch_rejected() {
        let p = Arc::new(Partition::dyadic(System::doubling(), 1).unwrap());
        let f = Observable::Cell(CellFunction::indicator(p, 0));
        let g = Observable::Character(CharacterFunction::character(1, 0));
        assert!(matches!(inner_product(&f, &g), Err(Error::RepresentationMismatch(_))));
    }

    #[test]
    fn conditional_expectation_of_quarter_interval() {
        // E[1_{[0,1/4)} | dyadic level-1] = 1/2 on [0,1/2), 0 elsewhere.
        let sys = System::doubling();
        let fine = Arc::new(Partition::dyadic(sys.clone(), 2).unwrap());
        let coarse = Arc::new(Partition::dyadic(sys, 1).unwrap());
        let f = CellFunction::indicator(fine, 0);
        let e = conditional_expectation(&f, &coarse, DEFAULT_CELL_BUDGET).unwrap();
        assert_relative_eq!(e.coeffs()[0].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.coeffs()[1].re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn conditional_expectation_on_trivial_is_mean() {
        let sys = System::doubling();
        let fine = Arc::new(Partition::dyadic(sys.clone(), 3).unwrap());
        let trivial = Arc::new(Partition::dyadic(sys, 0).unwrap());
        let f = CellFunction::from_reals(fine, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        let e = conditional_expectation(&f, &trivial, DEFAULT_CELL_BUDGET).unwrap();
        assert_relative_eq!(e.coeffs()[0].re, 4.5, epsilon = 1e-12);
        assert_relative_eq!(e.mean().re, f.mean().re, epsilon = 1e-12);
    }

    #[test]
    fn conditional_expectation_is_idempotent() {
        let sys = System::doubling();
        let fine = Arc::new(Partition::dyadic(sys.clone(), 3).unwrap());
        let beta = Arc::new(Partition::dyadic(sys, 1).unwrap());
        let f = CellFunction::from_reals(fine, &[0.1, 0.9, 0.4, 0.7, 0.2, 0.8, 0.3, 0.6]).unwrap();
        let e1 = conditional_expectation(&f, &beta, DEFAULT_CELL_BUDGET).unwrap();
        let e2 = conditional_expectation(&e1, &beta, DEFAULT_CELL_BUDGET).unwrap();
        for i in 0..2 {
            assert_relative_eq!(e1.coeffs()[i].re, e2.coeffs()[i].re, epsilon = 1e-14);
        }
    }

    #[test]
    fn markov_properties_of_conditioning() {
        // Positivity and E[1 | beta] = 1 and the L2 contraction.
        let sys = System::doubling();
        let fine = Arc::new(Partition::dyadic(sys.clone(), 4).unwrap());
        let beta = Arc::new(Partition::dyadic(sys, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let coeffs: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
        let f = CellFunction::from_reals(fine.clone(), &coeffs).unwrap();
        let e = conditional_expectation(&f, &beta, DEFAULT_CELL_BUDGET).unwrap();
        assert!(e.coeffs().iter().all(|z| z.re >= -1e-15));
        assert!(e.norm() <= f.norm() + 1e-12);
        let one = CellFunction::one(fine);
        let e1 = conditional_expectation(&one, &beta, DEFAULT_CELL_BUDGET).unwrap();
        for i in 0..4 {
            assert_relative_eq!(e1.coeffs()[i].re, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn l1_error_vanishes_for_measurable_cell() {
        let sys = System::doubling();
        let beta = Partition::dyadic(sys.clone(), 2).unwrap();
        let a = Cell::dyadic_interval(2, 1);
        let e = l1_projection_error(&sys, &a, &beta).unwrap();
        assert_eq!(e.direct, 0.0);
        assert_eq!(e.closed_form, 0.0);
    }

    #[test]
    fn l1_error_hand_value() {
        // A = [0, 1/4), beta = level 1: 2 * (1/4 * 1/4) / (1/2) = 1/4.
        let sys = System::doubling();
        let beta = Partition::dyadic(sys.clone(), 1).unwrap();
        let a = Cell::dyadic_interval(2, 0);
        let e = l1_projection_error(&sys, &a, &beta).unwrap();
        assert_relative_eq!(e.closed_form, 0.25, epsilon = 1e-15);
        assert_relative_eq!(e.direct, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn l1_error_routes_agree_on_random_instances() {
        let sys = System::doubling();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let level = rng.random_range(1..6u8);
            let beta = Partition::dyadic(sys.clone(), level).unwrap();
            let a_level = rng.random_range(1..6u8);
            let a = Cell::dyadic_interval(a_level, rng.random_range(0..(1u64 << a_level)));
            let e = l1_projection_error(&sys, &a, &beta).unwrap();
            assert!((e.direct - e.closed_form).abs() < 1e-12);
        }
    }

    #[test]
    fn l1_error_monte_carlo_matches_closed_form() {
        let sys = System::doubling();
        let beta = Partition::dyadic(sys.clone(), 2).unwrap();
        let a = Cell::dyadic_interval(3, 2);
        let exact = l1_projection_error(&sys, &a, &beta).unwrap();
        let pool = SamplePool::draw(&sys, 100_000, 31).unwrap();
        let (mc, stderr) = l1_projection_error_monte_carlo(&sys, &a, &beta, &pool).unwrap();
        assert!((mc - exact.closed_form).abs() < 3.0 * stderr + 1e-12);
    }

    #[test]
    fn projection_recovers_span_members() {
        let sys = System::doubling();
        let beta = Arc::new(Partition::dyadic(sys, 2).unwrap());
        let f = CellFunction::from_reals(beta.clone(), &[1.0, -2.0, 0.5, 3.0]).unwrap();
        let gram = indicator_gram(&beta);
        let rhs = indicator_pairing(&f, &beta, DEFAULT_CELL_BUDGET).unwrap();
        let (coeffs, rank) = orthogonal_project(&gram, &rhs);
        assert_eq!(rank, 4);
        let proj = CellFunction::new(beta, coeffs).unwrap();
        for i in 0..4 {
            assert_relative_eq!(proj.coeffs()[i].re, f.coeffs()[i].re, epsilon = 1e-10);
        }
    }

    #[test]
    fn projection_equals_conditional_expectation() {
        // Gram solve against indicators, conditional expectation formula:
        // same operator.
        let sys = System::doubling();
        let fine = Arc::new(Partition::dyadic(sys.clone(), 4).unwrap());
        let beta = Arc::new(Partition::dyadic(sys, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let coeffs: Vec<Complex64> =
                (0..16).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let f = CellFunction::new(fine.clone(), DVector::from_vec(coeffs)).unwrap();
            let e = conditional_expectation(&f, &beta, DEFAULT_CELL_BUDGET).unwrap();
            let gram = indicator_gram(&beta);
            let rhs = indicator_pairing(&f, &beta, DEFAULT_CELL_BUDGET).unwrap();
            let (proj, _) = orthogonal_project(&gram, &rhs);
            let mut diff_sq = 0.0;
            for i in 0..4 {
                diff_sq += (proj[i] - e.coeffs()[i]).norm_sqr() * beta.measure(i);
            }
            assert!(diff_sq.sqrt() < 1e-10);
        }
    }

    #[test]
    fn projection_of_orthogonal_function_is_zero() {
        // f with zero mean on each conditioning cell projects to zero.
        let sys = System::doubling();
        let fine = Arc::new(Partition::dyadic(sys.clone(), 2).unwrap());
        let beta = Arc::new(Partition::dyadic(sys, 1).unwrap());
        let f = CellFunction::from_reals(fine, &[1.0, -1.0, 2.0, -2.0]).unwrap();
        let gram = indicator_gram(&beta);
        let rhs = indicator_pairing(&f, &beta, DEFAULT_CELL_BUDGET).unwrap();
        let (proj, _) = orthogonal_project(&gram, &rhs);
        assert!(proj.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn koopman_pairing_matches_markov_kernel() {
        // <1_Ai, T 1_Aj> = mu(A_i cap phi^{-1} A_j) for the doubling map at
        // level 1: every entry is 1/4.
        let sys = System::doubling();
        let p = Arc::new(Partition::dyadic(sys, 1).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                let f = CellFunction::indicator(p.clone(), i);
                let g = CellFunction::indicator(p.clone(), j);
                let v = koopman_pairing(&f, &g, 1).unwrap();
                assert_relative_eq!(v.re, 0.25, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn skew_character_orbit_is_orthonormal() {
        let sys = System::skew_rotation_golden();
        let f = CharacterFunction::character(0, 1);
        for j in -4i64..=4 {
            for k in -4i64..=4 {
                let tj = f.koopman_pow(&sys, j).unwrap();
                let tk = f.koopman_pow(&sys, k).unwrap();
                let ip = tj.inner(&tk);
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((ip - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_character_is_eigenvector() {
        let sys = System::rotation_golden();
        let f = CharacterFunction::character(1, 0);
        let tf = f.koopman_pow(&sys, 1).unwrap();
        // Same character, phase e^{2 pi i alpha}.
        assert_eq!(tf.terms().len(), 1);
        let amp = tf.terms()[&(1, 0)];
        let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 0.618_033_988_749_894_8);
        assert!((amp - expect).norm() < 1e-12);
        // Inverse undoes the phase.
        let back = tf.koopman_pow(&sys, -1).unwrap();
        assert!((back.terms()[&(1, 0)] - c(1.0, 0.0)).norm() < 1e-12);
    }
}
