//! The bilateral shift as a pure unitary on finitely supported
//! integer-indexed coordinate vectors. This is the desk model for a
//! countable Lebesgue component: the orbit of a basis vector is an
//! orthonormal basis of its cyclic subspace.

use num_complex::Complex64;

/// Finitely supported vector in `l^2(Z)`: coordinate `offset + j` carries
/// amplitude `amps[j]`.
#[derive(Debug, Clone)]
pub struct ShiftVector {
    pub offset: i64,
    pub amps: Vec<Complex64>,
}

impl ShiftVector {
    /// Basis vector `e_i`.
    pub fn basis(i: i64) -> Self {
        ShiftVector { offset: i, amps: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn coordinate(&self, i: i64) -> Complex64 {
        let j = i - self.offset;
        if j < 0 || j as usize >= self.amps.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.amps[j as usize]
        }
    }

    /// Apply the shift `k` times: `T e_i = e_{i+1}`, exactly.
    pub fn stepped(&self, k: i64) -> Self {
        ShiftVector { offset: self.offset + k, amps: self.amps.clone() }
    }

    /// Inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &ShiftVector) -> Complex64 {
        let lo = self.offset.max(other.offset);
        let hi = (self.offset + self.amps.len() as i64).min(other.offset + other.amps.len() as i64);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in lo..hi {
            acc += self.coordinate(i).conj() * other.coordinate(i);
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_of_basis_vector_is_orthonormal() {
        let e0 = ShiftVector::basis(0);
        for j in -3i64..=3 {
            for k in -3i64..=3 {
                let ip = e0.stepped(j).inner(&e0.stepped(k));
                let expect = if j == k { 1.0 } else { 0.0 };
                assert_eq!(ip, Complex64::new(expect, 0.0));
            }
        }
    }
}
