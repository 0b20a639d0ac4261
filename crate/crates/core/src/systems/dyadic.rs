//! Exact dyadic arithmetic for the doubling and baker maps.
//!
//! Points on the unit interval are stored as u128 fixed-point fractions
//! `k / 2^128`, so the doubling map is a wrapping left shift and the baker
//! map moves the carried bit between the two coordinates. Sampling fills
//! only the top 64 bits, which leaves 64 bits of headroom: the baker map
//! deepens one coordinate per step, and with that headroom up to 64
//! iterations in either direction stay exact. The sampling grid is fine
//! enough that every dyadic cell of level <= 63 receives exactly its
//! Lebesgue measure under uniform sampling.

/// Fixed-point coordinate in `[0, 1)` with denominator `2^128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCoord(pub u128);

impl DyadicCoord {
    /// Exact dyadic fraction `num / 2^log2_den`. Panics if `log2_den > 64`
    /// or the value lands outside `[0, 1)`.
    pub fn from_dyadic(num: u64, log2_den: u32) -> Self {
        assert!(log2_den <= 64, "denominator exponent too large");
        if log2_den < 64 {
            assert!(num < (1u64 << log2_den), "value outside [0, 1)");
        }
        DyadicCoord((num as u128) << (128 - log2_den))
    }

    /// Uniform grid point from a 64-bit draw.
    pub fn from_bits(bits: u64) -> Self {
        DyadicCoord((bits as u128) << 64)
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2f64.powi(128)
    }

    /// Doubling step `x -> 2x mod 1`.
    pub fn double(self) -> Self {
        DyadicCoord(self.0.wrapping_shl(1))
    }

    /// Index of the level-`m` dyadic interval containing the point.
    pub fn dyadic_index(self, level: u8) -> u64 {
        debug_assert!(level <= 63);
        if level == 0 {
            0
        } else {
            (self.0 >> (128 - level as u32)) as u64
        }
    }
}

/// Half-open dyadic interval `[index / 2^level, (index + 1) / 2^level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicIv {
    pub level: u8,
    pub index: u64,
}

impl DyadicIv {
    pub fn new(level: u8, index: u64) -> Self {
        assert!(level <= 63, "interval level exceeds 63");
        assert!(index < (1u64 << level) || level == 0, "index outside level");
        DyadicIv { level, index }
    }

    pub fn full() -> Self {
        DyadicIv { level: 0, index: 0 }
    }

    pub fn measure(self) -> f64 {
        2f64.powi(-(self.level as i32))
    }

    pub fn contains(self, p: DyadicCoord) -> bool {
        p.dyadic_index(self.level) == self.index
    }

    /// Start of the interval on the 64-bit grid.
    pub fn start(self) -> u64 {
        if self.level == 0 {
            0
        } else {
            self.index << (64 - self.level as u32)
        }
    }

    /// Intersection of two dyadic intervals: nested or disjoint.
    pub fn intersect(self, other: DyadicIv) -> Option<DyadicIv> {
        let (coarse, fine) = if self.level <= other.level {
            (self, other)
        } else {
            (other, self)
        };
        let shift = (fine.level - coarse.level) as u32;
        if fine.index >> shift == coarse.index {
            Some(fine)
        } else {
            None
        }
    }

    /// Preimage under the doubling map: two intervals one level deeper.
    pub fn doubling_preimage(self) -> [DyadicIv; 2] {
        let l = self.level + 1;
        assert!(l <= 63, "preimage level exceeds 63");
        [
            DyadicIv { level: l, index: self.index },
            DyadicIv { level: l, index: self.index + (1u64 << self.level) },
        ]
    }
}

/// Dyadic rectangle, the product of an x- and a y-interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicRect {
    pub x: DyadicIv,
    pub y: DyadicIv,
}

impl DyadicRect {
    pub fn measure(self) -> f64 {
        2f64.powi(-(self.x.level as i32 + self.y.level as i32))
    }

    pub fn contains(self, px: DyadicCoord, py: DyadicCoord) -> bool {
        self.x.contains(px) && self.y.contains(py)
    }

    pub fn intersect(self, other: DyadicRect) -> Option<DyadicRect> {
        Some(DyadicRect {
            x: self.x.intersect(other.x)?,
            y: self.y.intersect(other.y)?,
        })
    }

    /// Preimage under the baker map `(x, y) -> (2x mod 1, (y + floor(2x)) / 2)`.
    ///
    /// The x-side halves and the y-side doubles; when the y-interval is the
    /// whole circle the preimage splits into the two x-branches.
    pub fn baker_preimage(self) -> Vec<DyadicRect> {
        let xl = self.x.level + 1;
        assert!(xl <= 63, "preimage x-level exceeds 63");
        if self.y.level >= 1 {
            // The leading bit of the y-interval selects the branch.
            let t = self.y.index >> (self.y.level - 1);
            let x = DyadicIv { level: xl, index: (t << self.x.level) | self.x.index };
            let y = DyadicIv {
                level: self.y.level - 1,
                index: self.y.index & !(1u64 << (self.y.level - 1)),
            };
            vec![DyadicRect { x, y }]
        } else {
            let y = DyadicIv::full();
            vec![
                DyadicRect { x: DyadicIv { level: xl, index: self.x.index }, y },
                DyadicRect {
                    x: DyadicIv { level: xl, index: self.x.index + (1u64 << self.x.level) },
                    y,
                },
            ]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_on_quarter() {
        let p = DyadicCoord::from_dyadic(1, 2);
        assert_eq!(p.double(), DyadicCoord::from_dyadic(1, 1));
    }

    #[test]
    fn interval_nesting() {
        let a = DyadicIv::new(1, 0);
        let b = DyadicIv::new(3, 3);
        assert_eq!(a.intersect(b), Some(b));
        let c = DyadicIv::new(3, 5);
        assert_eq!(a.intersect(c), None);
    }

    #[test]
    fn doubling_preimage_has_equal_measure() {
        let a = DyadicIv::new(3, 5);
        let pre = a.doubling_preimage();
        let total: f64 = pre.iter().map(|iv| iv.measure()).sum();
        assert_eq!(total, a.measure());
        // The two halves land in opposite halves of the interval.
        assert!(pre[0].start() < (1u64 << 63));
        assert!(pre[1].start() >= (1u64 << 63));
    }

    #[test]
    fn baker_preimage_measure_preserved() {
        for (xl, xi, yl, yi) in [(2, 1, 2, 3), (1, 0, 0, 0), (3, 7, 1, 1)] {
            let r = DyadicRect { x: DyadicIv::new(xl, xi), y: DyadicIv::new(yl, yi) };
            let pre = r.baker_preimage();
            let total: f64 = pre.iter().map(|q| q.measure()).sum();
            assert_eq!(total, r.measure());
        }
    }
}
