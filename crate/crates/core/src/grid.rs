//! Uniform grids on the periodic box `[0, 2*pi)^3` and the sampled time
//! window `B_{2s}(t0)`.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Spatial grid: `n` points per axis on the torus of side `2*pi`, together
/// with the time sampling of the window `B_{2s}(t0) = (t0 - 2s, t0 + 2s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Points per axis (power of two, >= 8).
    pub n: usize,
    /// Time samples across the window (>= 5; odd keeps `t0` on the grid).
    pub nt: usize,
    /// Centre of the time window.
    pub t0: f64,
    /// Half of the half-width: the window is `(t0 - 2s, t0 + 2s)`.
    pub s: f64,
}

impl Grid {
    pub fn new(n: usize, nt: usize, t0: f64, s: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(CoreError::InvalidGrid(format!(
                "n must be a power of two >= 8 (got {n})"
            )));
        }
        if nt < 5 {
            return Err(CoreError::InvalidGrid(format!("nt must be >= 5 (got {nt})")));
        }
        if !(s > 0.0) || !(t0 - 2.0 * s >= 0.0) {
            return Err(CoreError::InvalidGrid(format!(
                "time window (t0={t0}, s={s}) must satisfy s > 0 and t0 - 2s >= 0"
            )));
        }
        Ok(Grid { n, nt, t0, s })
    }

    /// Spatial-only grid with a minimal legal time axis.
    pub fn spatial(n: usize) -> Result<Self> {
        Grid::new(n, 5, 0.5, 0.1)
    }

    /// Total number of spatial points, `n^3`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `2*pi / n`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        std::f64::consts::TAU / self.n as f64
    }

    /// Time-step of the sampled window.
    #[inline]
    pub fn dt(&self) -> f64 {
        4.0 * self.s / (self.nt - 1) as f64
    }

    /// The i-th time sample, `t0 - 2s + i*dt`.
    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t0 - 2.0 * self.s + self.dt() * i as f64
    }

    /// All time samples.
    pub fn times(&self) -> Vec<f64> {
        (0..self.nt).map(|i| self.time(i)).collect()
    }

    /// Flattened index of the spatial point `(ix, iy, iz)`; `iz` fastest.
    #[inline]
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    /// Physical coordinate of grid index `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    /// Signed integer wavenumber for FFT bin `i` (Nyquist bin maps to `-n/2`).
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 - 1 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Wavenumbers for every bin along one axis.
    pub fn wavenumbers(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n != other.n {
            return Err(CoreError::GridMismatch(self.n, other.n));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_layout() {
        let g = Grid::spatial(8).unwrap();
        assert_eq!(g.wavenumbers(), vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::spatial(7).is_err());
        assert!(Grid::spatial(4).is_err());
        assert!(Grid::new(8, 3, 0.5, 0.1).is_err());
        assert!(Grid::new(8, 5, 0.1, 0.2).is_err());
    }

    #[test]
    fn time_axis_centred() {
        let g = Grid::new(8, 33, 0.5, 0.01).unwrap();
        assert!((g.time(16) - 0.5).abs() < 1e-15);
        assert!((g.time(0) - 0.48).abs() < 1e-15);
        assert!((g.time(32) - 0.52).abs() < 1e-15);
    }
}
