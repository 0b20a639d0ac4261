//! Static, conditional and dynamical partition entropies.
//!
//! All entropies are in nats; zero-measure cells are skipped in every sum.
//! Monte-Carlo estimates carry a delta-method standard error derived from
//! the multinomial covariance of the cell frequencies.

use crate::error::{Error, Result};
use crate::partition::{Partition, Provenance};

/// One term of the entropy-rate sequence.
#[derive(Debug, Clone, Copy)]
pub struct EntropyEstimate {
    /// `(1/n) H(join of the first n preimages)` in nats.
    pub value: f64,
    /// Refinement depth this term belongs to.
    pub n_used: usize,
    /// Standard error in nats; 0 in exact mode.
    pub stderr: f64,
}

/// Shannon entropy `-sum w log w` of a probability vector, in nats.
pub fn static_entropy(weights: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &w in weights {
        if w < -1e-12 {
            return Err(Error::NegativeWeight(w));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::SumNotOne(sum));
    }
    Ok(weights.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.ln()).sum())
}

/// Static entropy of a partition's cell measures.
pub fn partition_entropy(alpha: &Partition) -> f64 {
    alpha.measures().iter().filter(|&&w| w > 0.0).map(|&w| -w * w.ln()).sum()
}

/// Delta-method standard error of the plug-in entropy estimate for a
/// multinomial sample of size `n`: the asymptotic variance is
/// `(sum p (log p + 1)^2 - (sum p (log p + 1))^2) / n`.
pub fn entropy_stderr(measures: &[f64], n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut first = 0.0;
    let mut second = 0.0;
    for &p in measures.iter().filter(|&&p| p > 0.0) {
        let g = p.ln() + 1.0;
        first += p * g * g;
        second += p * g;
    }
    ((first - second * second).max(0.0) / n as f64).sqrt()
}

/// Conditional entropy `H(alpha | beta) = H(alpha v beta) - H(beta)`.
pub fn conditional_entropy(alpha: &Partition, beta: &Partition, budget: usize) -> Result<f64> {
    let joined = alpha.refine(beta, budget)?;
    Ok((partition_entropy(&joined) - partition_entropy(beta)).max(0.0))
}

/// The sequence `(1/n) H(v_{k<n} phi^{-k} alpha)` for `n = 1..=n_max`.
pub fn entropy_rate(alpha: &Partition, n_max: usize, budget: usize) -> Result<Vec<EntropyEstimate>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("entropy rate needs n_max >= 1".into()));
    }
    let mut out = Vec::with_capacity(n_max);
    let mut acc = alpha.clone();
    let mut pre = alpha.clone();
    for n in 1..=n_max {
        if n > 1 {
            pre = pre.preimage()?;
            acc = acc.refine(&pre, budget)?;
        }
        let h = partition_entropy(&acc);
        let stderr = match acc.provenance() {
            Provenance::Exact => 0.0,
            Provenance::MonteCarlo { n: samples, .. } => {
                entropy_stderr(acc.measures(), *samples) / n as f64
            }
        };
        out.push(EntropyEstimate { value: h / n as f64, n_used: n, stderr });
    }
    Ok(out)
}
