//! Bilateral Bernoulli shift: symbol sequences and cylinder sets.
//!
//! A point is a total function from coordinates to symbols. Hand-built
//! points carry an explicit word and error out when a coordinate outside
//! the word is requested; sampled points derive every coordinate from a
//! seed, so their window extends on demand and never truncates.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;

use crate::error::{Error, Result};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Where a symbol sequence gets its symbols from.
#[derive(Debug, Clone)]
pub enum SymbolSource {
    /// Finite word covering coordinates `start .. start + word.len()`.
    Explicit { start: i64, word: Arc<Vec<u8>> },
    /// Seeded i.i.d. sequence: coordinate `i` is a pure function of
    /// `(seed, i)`, drawn from `cum` (cumulative symbol weights).
    Seeded { seed: u64, cum: Arc<Vec<f64>> },
}

impl SymbolSource {
    fn symbol(&self, i: i64) -> Result<u8> {
        match self {
            SymbolSource::Explicit { start, word } => {
                let off = i - start;
                if off < 0 || off as usize >= word.len() {
                    Err(Error::WindowExhausted(i))
                } else {
                    Ok(word[off as usize])
                }
            }
            SymbolSource::Seeded { seed, cum } => {
                let u = splitmix64(seed ^ (i as u64).wrapping_mul(0xd1342543de82ef95));
                let x = (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                for (s, &c) in cum.iter().enumerate() {
                    if x < c {
                        return Ok(s as u8);
                    }
                }
                Ok((cum.len() - 1) as u8)
            }
        }
    }
}

/// A point of the shift space: a symbol sequence read through an offset.
#[derive(Debug, Clone)]
pub struct SymbolPoint {
    pub offset: i64,
    pub source: SymbolSource,
}

impl SymbolPoint {
    pub fn from_word(start: i64, word: Vec<u8>) -> Self {
        SymbolPoint { offset: 0, source: SymbolSource::Explicit { start, word: Arc::new(word) } }
    }

    pub fn seeded(seed: u64, cum: Arc<Vec<f64>>) -> Self {
        SymbolPoint { offset: 0, source: SymbolSource::Seeded { seed, cum } }
    }

    /// Symbol at coordinate `i` of the (shifted) point.
    pub fn symbol(&self, i: i64) -> Result<u8> {
        self.source.symbol(i + self.offset)
    }

    /// `k`-fold left shift; negative `k` shifts right.
    pub fn shifted(&self, k: i64) -> Self {
        SymbolPoint { offset: self.offset + k, source: self.source.clone() }
    }
}

/// Cylinder set: finitely many coordinate constraints.
///
/// The empty constraint map is the whole space. Intersections merge the
/// maps and detect contradictions, preimages shift every constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cylinder {
    pub constraints: BTreeMap<i64, u8>,
}

impl Cylinder {
    pub fn full() -> Self {
        Cylinder { constraints: BTreeMap::new() }
    }

    pub fn from_word(start: i64, word: &[u8]) -> Self {
        let constraints = word
            .iter()
            .enumerate()
            .map(|(j, &s)| (start + j as i64, s))
            .collect();
        Cylinder { constraints }
    }

    pub fn intersect(&self, other: &Cylinder) -> Option<Cylinder> {
        let mut merged = self.constraints.clone();
        for (&i, &s) in &other.constraints {
            match merged.insert(i, s) {
                Some(prev) if prev != s => return None,
                _ => {}
            }
        }
        Some(Cylinder { constraints: merged })
    }

    /// Preimage under the left shift moves every constraint one step right.
    pub fn shift_preimage(&self) -> Cylinder {
        Cylinder {
            constraints: self.constraints.iter().map(|(&i, &s)| (i + 1, s)).collect(),
        }
    }

    /// Product measure of the cylinder, exact.
    pub fn measure(&self, weights: &[BigRational]) -> BigRational {
        let mut m = BigRational::from_integer(1.into());
        for &s in self.constraints.values() {
            m *= weights[s as usize].clone();
        }
        m
    }

    pub fn contains(&self, p: &SymbolPoint) -> Result<bool> {
        for (&i, &s) in &self.constraints {
            if p.symbol(i)? != s {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    #[test]
    fn cylinder_measure_is_product() {
        let w = vec![rational(3, 10), rational(7, 10)];
        let c = Cylinder::from_word(0, &[0, 1]);
        assert_eq!(c.measure(&w), rational(21, 100));
        assert!((c.measure(&w).to_f64().unwrap() - 0.21).abs() < 1e-15);
    }

    #[test]
    fn intersect_detects_contradiction() {
        let a = Cylinder::from_word(0, &[0]);
        let b = Cylinder::from_word(0, &[1]);
        assert!(a.intersect(&b).is_none());
        let c = Cylinder::from_word(1, &[1]);
        let ab = a.intersect(&c).unwrap();
        assert_eq!(ab.constraints.len(), 2);
    }

    #[test]
    fn shift_moves_constraints() {
        let c = Cylinder::from_word(0, &[0, 1]);
        let pre = c.shift_preimage();
        assert_eq!(pre.constraints.get(&1), Some(&0));
        assert_eq!(pre.constraints.get(&2), Some(&1));
    }

    #[test]
    fn explicit_point_errors_outside_window() {
        let p = SymbolPoint::from_word(0, vec![0, 1, 0]);
        assert_eq!(p.symbol(1).unwrap(), 1);
        assert!(p.symbol(5).is_err());
        // Shifting moves the readable window.
        let q = p.shifted(1);
        assert_eq!(q.symbol(0).unwrap(), 1);
    }

    #[test]
    fn seeded_point_is_total_and_deterministic() {
        let cum = Arc::new(vec![0.3, 1.0]);
        let p = SymbolPoint::seeded(42, cum.clone());
        let q = SymbolPoint::seeded(42, cum);
        for i in [-1000i64, -1, 0, 1, 999999] {
            assert_eq!(p.symbol(i).unwrap(), q.symbol(i).unwrap());
        }
    }
}
