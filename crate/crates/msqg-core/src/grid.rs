use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Square collocation grid on the 2π-periodic torus.
///
/// Wavenumbers are the centered integer lattice `k ∈ [-n/2, n/2)²` mapped to
/// array indices by standard FFT wrapping (index `i` holds `k = i` for
/// `i < n/2` and `k = i - n` otherwise). The Nyquist row and column
/// (`k = -n/2`) are always zeroed in constructed fields so that Hermitian
/// symmetry survives differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    /// Period of the box, fixed at 2π so lattice wavenumbers are integers.
    pub const PERIOD: f64 = 2.0 * std::f64::consts::PI;

    pub fn new(n: usize) -> Result<Self> {
        if !(16..=4096).contains(&n) || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        Ok(Grid { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice modes (= collocation points).
    #[inline]
    pub fn modes(&self) -> usize {
        self.n * self.n
    }

    /// Signed wavenumber for an array index along one axis.
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let i = idx as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Array index for a signed wavenumber along one axis, if representable.
    #[inline]
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k >= -n / 2 && k < n / 2 {
            Some(k.rem_euclid(n) as usize)
        } else {
            None
        }
    }

    /// Flat index of the lattice point `(k1, k2)`.
    #[inline]
    pub fn mode_index(&self, k1: i64, k2: i64) -> Option<usize> {
        let i = self.index_of(k1)?;
        let j = self.index_of(k2)?;
        Some(i * self.n + j)
    }

    /// True when the index lies on the Nyquist row or column `k = -n/2`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.wavenumber(idx) == -(self.n as i64) / 2
    }

    /// |k| for a flat mode index.
    #[inline]
    pub fn mode_abs(&self, flat: usize) -> f64 {
        let (k1, k2) = self.mode_at(flat);
        ((k1 * k1 + k2 * k2) as f64).sqrt()
    }

    /// Signed wavenumber pair for a flat index (row-major).
    #[inline]
    pub fn mode_at(&self, flat: usize) -> (i64, i64) {
        let i = flat / self.n;
        let j = flat % self.n;
        (self.wavenumber(i), self.wavenumber(j))
    }

    /// Iterate all flat indices with their wavenumber pairs.
    pub fn modes_iter(&self) -> impl Iterator<Item = (usize, (i64, i64))> + '_ {
        (0..self.modes()).map(move |f| (f, self.mode_at(f)))
    }

    /// Collocation point for a physical index pair.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        let h = Self::PERIOD / self.n as f64;
        (i as f64 * h, j as f64 * h)
    }

    /// Largest |k| on the lattice after Nyquist removal.
    pub fn max_abs_wavenumber(&self) -> f64 {
        let m = (self.n / 2 - 1) as f64;
        (2.0 * m * m).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_range() {
        assert!(Grid::new(64).is_ok());
        assert!(Grid::new(10).is_err());
        assert!(Grid::new(8).is_err());
        assert!(Grid::new(8192).is_err());
        assert!(matches!(Grid::new(48), Err(Error::InvalidGridSize(48))));
    }

    #[test]
    fn wavenumber_wrapping() {
        let g = Grid::new(64).unwrap();
        assert_eq!(g.wavenumber(0), 0);
        assert_eq!(g.wavenumber(31), 31);
        assert_eq!(g.wavenumber(32), -32);
        assert_eq!(g.wavenumber(63), -1);
        assert_eq!(g.index_of(-32), Some(32));
        assert_eq!(g.index_of(32), None);
        let g = Grid::new(256).unwrap();
        assert_eq!(g.modes(), 65536);
    }
}
