//! Circle and torus coordinates for the rotation and skew-rotation.
//!
//! Orbits of rational points under an irrational rotation live in the
//! module `Q + Z*alpha (mod 1)`, so an angle is stored as an exact rational
//! part plus an integer multiple of the irrational unit. Comparisons go
//! through the f64 value; for the golden-ratio angle and the bounded
//! multiples used here, distinct stored angles are separated by far more
//! than the f64 error, so those comparisons are reliable.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Default rotation angle `(sqrt(5) - 1) / 2`, a badly approximable
/// irrational that avoids accidental near-resonances.
pub const GOLDEN_ANGLE: f64 = 0.618_033_988_749_894_8;

/// Angle `frac + mult * unit (mod 1)` with `frac` rational and `unit` the
/// system's irrational constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleCoord {
    pub frac: BigRational,
    pub mult: i64,
}

impl AngleCoord {
    pub fn zero() -> Self {
        AngleCoord { frac: BigRational::zero(), mult: 0 }
    }

    pub fn one() -> Self {
        AngleCoord { frac: BigRational::from_integer(1.into()), mult: 0 }
    }

    pub fn rational(num: i64, den: i64) -> Self {
        AngleCoord { frac: BigRational::new(num.into(), den.into()), mult: 0 }
    }

    /// Value in `[0, 1)` (the representative `one()` maps to 1.0).
    pub fn value(&self, unit: f64) -> f64 {
        let raw = self.frac.to_f64().unwrap_or(0.0) + self.mult as f64 * unit;
        if self.mult == 0 {
            // Keep exact rationals untouched so interval endpoints 0 and 1
            // compare exactly.
            if (0.0..=1.0).contains(&raw) {
                return raw;
            }
        }
        let v = raw.rem_euclid(1.0);
        if v == 1.0 {
            0.0
        } else {
            v
        }
    }

    pub fn add_units(&self, k: i64) -> Self {
        AngleCoord { frac: self.frac.clone(), mult: self.mult + k }
    }

    pub fn add(&self, other: &AngleCoord) -> Self {
        AngleCoord { frac: &self.frac + &other.frac, mult: self.mult + other.mult }
    }

    pub fn sub(&self, other: &AngleCoord) -> Self {
        AngleCoord { frac: &self.frac - &other.frac, mult: self.mult - other.mult }
    }
}

/// Non-wrapping half-open arc `[lo, hi)` on the circle.
#[derive(Debug, Clone)]
pub struct ArcIv {
    pub lo: AngleCoord,
    pub hi: AngleCoord,
}

impl ArcIv {
    pub fn lo_value(&self, unit: f64) -> f64 {
        self.lo.value(unit)
    }

    /// Upper endpoint value; an endpoint that wraps to the cut point reads
    /// as 1 so arcs ending there keep their length.
    pub fn hi_value(&self, unit: f64) -> f64 {
        let h = self.hi.value(unit);
        if h <= self.lo.value(unit) {
            1.0
        } else {
            h
        }
    }

    pub fn length(&self, unit: f64) -> f64 {
        (self.hi_value(unit) - self.lo_value(unit)).max(0.0)
    }

    pub fn contains_value(&self, v: f64, unit: f64) -> bool {
        self.lo_value(unit) <= v && v < self.hi_value(unit)
    }

    pub fn intersect(&self, other: &ArcIv, unit: f64) -> Option<ArcIv> {
        let (alo, ahi) = (self.lo_value(unit), self.hi_value(unit));
        let (blo, bhi) = (other.lo_value(unit), other.hi_value(unit));
        let (lo, vlo) = if alo >= blo {
            (self.lo.clone(), alo)
        } else {
            (other.lo.clone(), blo)
        };
        let (hi, vhi) = if ahi <= bhi {
            (self.hi.clone(), ahi)
        } else {
            (other.hi.clone(), bhi)
        };
        if vlo < vhi {
            Some(ArcIv { lo, hi })
        } else {
            None
        }
    }

    /// Shift by `k` units of the rotation amount, split at 0 if the
    /// shifted arc wraps. The result is a list of non-wrapping arcs.
    pub fn shifted_units(&self, k: i64, unit: f64) -> Vec<ArcIv> {
        let lo = self.lo.add_units(k);
        let hi = self.hi.add_units(k);
        let vlo = lo.value(unit);
        // Length is invariant under the shift.
        let len = self.length(unit);
        if vlo + len <= 1.0 + 1e-15 {
            vec![ArcIv { lo, hi }]
        } else {
            vec![ArcIv { lo, hi: AngleCoord::one() }, ArcIv { lo: AngleCoord::zero(), hi }]
        }
    }
}
