//! Periodic fields on `T^3` carried as Fourier coefficients with
//! real-space views.
//!
//! Fields are immutable after construction. The spectral band is the
//! symmetric cube `|k_i| <= n/2 - 1`; Nyquist planes are projected out on
//! construction so that every retained mode has a conjugate partner and all
//! spectral multipliers preserve real-valuedness exactly.

mod appendix;
mod norms;
mod ops;
mod random;
mod snapshot;

pub use appendix::{
    decorrelation_check, inv_grad_product_check, mean_smallness_check, DecorrelationReport,
    InvGradProductReport, MeanSmallnessReport,
};
pub use norms::{c_norm, c_norm_vector, lp_norm, lp_norm_values, parseval_l2};
pub use ops::{
    curl, div, div_tensor, grad, helmholtz, inv_gradient_norm, inv_laplacian, laplacian,
    laplacian_vec, pressure_from_velocity, project_high_pass, project_nonzero,
    project_nonzero_vec, reynolds,
};
pub use random::{random_divergence_free, random_scalar, random_sym_tensor, random_vector};
pub use snapshot::{read_snapshot, write_csv_slice_plane, write_csv_slice_line, write_snapshot, Snapshot};

use crate::error::{CoreError, Result};
use crate::fft::Fft3;
use crate::grid::Grid;
use crate::scalar::{torus_volume, Real};
use num_complex::Complex;
use rayon::prelude::*;

/// Scalar field: complex Fourier coefficients indexed by
/// `k in {-n/2, ..., n/2 - 1}^3` (Nyquist planes identically zero).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T: Real> {
    grid: Grid,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> ScalarField<T> {
    /// Build from real-space samples (z index fastest).
    pub fn from_values(grid: Grid, values: &[T]) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count != grid size");
        let mut coeffs: Vec<Complex<T>> = values
            .iter()
            .map(|&v| Complex::new(v, T::zero()))
            .collect();
        Fft3::new(grid.n).forward(&mut coeffs);
        let mut f = ScalarField { grid, coeffs };
        f.project_band();
        f.symmetrize();
        f
    }

    /// Build from Fourier coefficients (band-projected and symmetrized).
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex<T>>) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count != grid size");
        let mut f = ScalarField { grid, coeffs };
        f.project_band();
        f.symmetrize();
        f
    }

    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            coeffs: vec![Complex::new(T::zero(), T::zero()); grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: T) -> Self {
        let mut f = ScalarField::zeros(grid);
        f.coeffs[0] = Complex::new(value, T::zero());
        f
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Coefficient at integer wavenumber `(kx, ky, kz)`; zero outside band.
    pub fn coeff(&self, kx: i64, ky: i64, kz: i64) -> Complex<T> {
        let n = self.grid.n as i64;
        let half = n / 2;
        if kx.abs() >= half || ky.abs() >= half || kz.abs() >= half {
            return Complex::new(T::zero(), T::zero());
        }
        let wrap = |k: i64| ((k % n) + n) % n;
        let idx = ((wrap(kx) as usize * self.grid.n) + wrap(ky) as usize) * self.grid.n
            + wrap(kz) as usize;
        self.coeffs[idx]
    }

    /// Real-space samples (inverse transform of the coefficients).
    pub fn values(&self) -> Vec<T> {
        let mut buf = self.coeffs.clone();
        Fft3::new(self.grid.n).inverse(&mut buf);
        buf.into_par_iter().map(|c| c.re).collect()
    }

    /// Real-space samples on a grid refined by `factor` (spectral
    /// interpolation by zero padding).
    pub fn values_refined(&self, factor: usize) -> Vec<T> {
        assert!(factor >= 1);
        if factor == 1 {
            return self.values();
        }
        let n = self.grid.n;
        let m = n * factor;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); m * m * m];
        let wrap = |k: i64, size: usize| (((k % size as i64) + size as i64) % size as i64) as usize;
        for ix in 0..n {
            let kx = self.grid.wavenumber(ix);
            for iy in 0..n {
                let ky = self.grid.wavenumber(iy);
                for iz in 0..n {
                    let kz = self.grid.wavenumber(iz);
                    let src = (ix * n + iy) * n + iz;
                    let dst = (wrap(kx, m) * m + wrap(ky, m)) * m + wrap(kz, m);
                    buf[dst] = self.coeffs[src];
                }
            }
        }
        Fft3::new(m).inverse(&mut buf);
        buf.into_par_iter().map(|c| c.re).collect()
    }

    /// Mean over the torus (the `k = 0` coefficient).
    #[inline]
    pub fn mean(&self) -> T {
        self.coeffs[0].re
    }

    /// Integral over the torus, `(2 pi)^3 * mean`.
    #[inline]
    pub fn integral(&self) -> T {
        self.mean() * torus_volume::<T>()
    }

    /// Largest coefficient magnitude (cheap spectral size estimate).
    pub fn coeff_linf(&self) -> T {
        self.coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
            .sqrt()
    }

    /// Pointwise product sampled on the shared grid (aliased product).
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let a = self.values();
        let b = other.values();
        let prod: Vec<T> = a.par_iter().zip(b.par_iter()).map(|(&x, &y)| x * y).collect();
        Ok(ScalarField::from_values(self.grid, &prod))
    }

    /// Product computed on a 3/2-padded grid before truncation, so the
    /// retained band is alias-free.
    pub fn dealiased_mul(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let n = self.grid.n;
        let m = 3 * n / 2;
        let pad = |f: &ScalarField<T>| -> Vec<Complex<T>> {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); m * m * m];
            let wrap =
                |k: i64| ((((k % m as i64) + m as i64) % m as i64) as usize).min(m - 1);
            for ix in 0..n {
                let kx = f.grid.wavenumber(ix);
                for iy in 0..n {
                    let ky = f.grid.wavenumber(iy);
                    for iz in 0..n {
                        let kz = f.grid.wavenumber(iz);
                        buf[(wrap(kx) * m + wrap(ky)) * m + wrap(kz)] =
                            f.coeffs[(ix * n + iy) * n + iz];
                    }
                }
            }
            buf
        };
        let fft_m = Fft3::new(m);
        let mut a = pad(self);
        let mut b = pad(other);
        fft_m.inverse(&mut a);
        fft_m.inverse(&mut b);
        a.par_iter_mut().zip(b.par_iter()).for_each(|(x, y)| *x *= y);
        fft_m.forward(&mut a);
        // Truncate back to the n-band.
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); n * n * n];
        let wrap_m = |k: i64| (((k % m as i64) + m as i64) % m as i64) as usize;
        for ix in 0..n {
            let kx = self.grid.wavenumber(ix);
            for iy in 0..n {
                let ky = self.grid.wavenumber(iy);
                for iz in 0..n {
                    let kz = self.grid.wavenumber(iz);
                    coeffs[(ix * n + iy) * n + iz] =
                        a[(wrap_m(kx) * m + wrap_m(ky)) * m + wrap_m(kz)];
                }
            }
        }
        Ok(ScalarField::from_coeffs(self.grid, coeffs))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let coeffs = self
            .coeffs
            .par_iter()
            .zip(other.coeffs.par_iter())
            .map(|(a, b)| a + b)
            .collect();
        Ok(ScalarField { grid: self.grid, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let coeffs = self
            .coeffs
            .par_iter()
            .zip(other.coeffs.par_iter())
            .map(|(a, b)| a - b)
            .collect();
        Ok(ScalarField { grid: self.grid, coeffs })
    }

    pub fn scale(&self, factor: T) -> Self {
        ScalarField {
            grid: self.grid,
            coeffs: self.coeffs.par_iter().map(|c| c.scale(factor)).collect(),
        }
    }

    /// Apply a spectral multiplier `m(kx, ky, kz)`.
    pub fn multiplier<F>(&self, m: F) -> Self
    where
        F: Fn(i64, i64, i64) -> Complex<T> + Sync,
    {
        let n = self.grid.n;
        let grid = self.grid;
        let coeffs: Vec<Complex<T>> = self
            .coeffs
            .par_iter()
            .enumerate()
            .map(|(idx, c)| {
                let iz = idx % n;
                let iy = (idx / n) % n;
                let ix = idx / (n * n);
                c * m(grid.wavenumber(ix), grid.wavenumber(iy), grid.wavenumber(iz))
            })
            .collect();
        ScalarField { grid, coeffs }
    }

    /// Deviation from Hermitian symmetry before symmetrization would fix it;
    /// kept as a diagnostic (construction already enforces symmetry).
    pub fn hermitian_error(&self) -> T {
        let n = self.grid.n as i64;
        let mut worst = T::zero();
        for ix in 0..self.grid.n {
            for iy in 0..self.grid.n {
                for iz in 0..self.grid.n {
                    let (kx, ky, kz) = (
                        self.grid.wavenumber(ix),
                        self.grid.wavenumber(iy),
                        self.grid.wavenumber(iz),
                    );
                    if kx.abs() == n / 2 || ky.abs() == n / 2 || kz.abs() == n / 2 {
                        continue;
                    }
                    let a = self.coeff(kx, ky, kz);
                    let b = self.coeff(-kx, -ky, -kz).conj();
                    let d = (a - b).norm();
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        worst
    }

    fn project_band(&mut self) {
        let n = self.grid.n;
        let half = (n / 2) as i64;
        let grid = self.grid;
        self.coeffs.par_iter_mut().enumerate().for_each(|(idx, c)| {
            let iz = idx % n;
            let iy = (idx / n) % n;
            let ix = idx / (n * n);
            let (kx, ky, kz) = (
                grid.wavenumber(ix),
                grid.wavenumber(iy),
                grid.wavenumber(iz),
            );
            if kx.abs() >= half || ky.abs() >= half || kz.abs() >= half {
                *c = Complex::new(T::zero(), T::zero());
            }
        });
    }

    /// Enforce `c(-k) = conj(c(k))` exactly.
    fn symmetrize(&mut self) {
        let n = self.grid.n;
        let wrap = |k: i64| (((k % n as i64) + n as i64) % n as i64) as usize;
        let half = T::from_f64(0.5).unwrap();
        for ix in 0..n {
            let kx = self.grid.wavenumber(ix);
            if kx.abs() == (n / 2) as i64 {
                continue;
            }
            for iy in 0..n {
                let ky = self.grid.wavenumber(iy);
                if ky.abs() == (n / 2) as i64 {
                    continue;
                }
                for iz in 0..n {
                    let kz = self.grid.wavenumber(iz);
                    if kz.abs() == (n / 2) as i64 {
                        continue;
                    }
                    let i = (ix * n + iy) * n + iz;
                    let j = (wrap(-kx) * n + wrap(-ky)) * n + wrap(-kz);
                    if i < j {
                        let avg = (self.coeffs[i] + self.coeffs[j].conj()).scale(half);
                        self.coeffs[i] = avg;
                        self.coeffs[j] = avg.conj();
                    } else if i == j {
                        self.coeffs[i] = Complex::new(self.coeffs[i].re, T::zero());
                    }
                }
            }
        }
    }
}

/// Vector field on `T^3`: three scalar components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T: Real> {
    pub components: [ScalarField<T>; 3],
}

impl<T: Real> VectorField<T> {
    pub fn new(components: [ScalarField<T>; 3]) -> Result<Self> {
        components[0].grid().check_same(components[1].grid())?;
        components[0].grid().check_same(components[2].grid())?;
        Ok(VectorField { components })
    }

    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            components: [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ],
        }
    }

    pub fn from_values(grid: Grid, values: [&[T]; 3]) -> Self {
        VectorField {
            components: [
                ScalarField::from_values(grid, values[0]),
                ScalarField::from_values(grid, values[1]),
                ScalarField::from_values(grid, values[2]),
            ],
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn values(&self) -> [Vec<T>; 3] {
        [
            self.components[0].values(),
            self.components[1].values(),
            self.components[2].values(),
        ]
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(VectorField {
            components: [
                self.components[0].add(&other.components[0])?,
                self.components[1].add(&other.components[1])?,
                self.components[2].add(&other.components[2])?,
            ],
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(VectorField {
            components: [
                self.components[0].sub(&other.components[0])?,
                self.components[1].sub(&other.components[1])?,
                self.components[2].sub(&other.components[2])?,
            ],
        })
    }

    pub fn scale(&self, factor: T) -> Self {
        VectorField {
            components: [
                self.components[0].scale(factor),
                self.components[1].scale(factor),
                self.components[2].scale(factor),
            ],
        }
    }

    pub fn mean(&self) -> [T; 3] {
        [
            self.components[0].mean(),
            self.components[1].mean(),
            self.components[2].mean(),
        ]
    }

    /// Largest pointwise magnitude over the grid.
    pub fn linf(&self) -> T {
        let vals = self.values();
        let mut worst = T::zero();
        for i in 0..vals[0].len() {
            let m = (vals[0][i] * vals[0][i] + vals[1][i] * vals[1][i] + vals[2][i] * vals[2][i])
                .sqrt();
            if m > worst {
                worst = m;
            }
        }
        worst
    }

    /// Pointwise tensor product `self (x) other` sampled on the grid.
    pub fn tensor_product(&self, other: &Self) -> Result<SymTensorField<T>> {
        self.grid().check_same(other.grid())?;
        let a = self.values();
        let b = other.values();
        let n3 = a[0].len();
        let half = T::from_f64(0.5).unwrap();
        let mut comps: [Vec<T>; 6] = Default::default();
        for c in comps.iter_mut() {
            c.reserve(n3);
        }
        for i in 0..n3 {
            // Symmetrized product (a (x) b + b (x) a) / 2 when a != b reduces
            // to the plain tensor square when the arguments coincide.
            comps[0].push(a[0][i] * b[0][i]);
            comps[1].push((a[0][i] * b[1][i] + a[1][i] * b[0][i]) * half);
            comps[2].push((a[0][i] * b[2][i] + a[2][i] * b[0][i]) * half);
            comps[3].push(a[1][i] * b[1][i]);
            comps[4].push((a[1][i] * b[2][i] + a[2][i] * b[1][i]) * half);
            comps[5].push(a[2][i] * b[2][i]);
        }
        Ok(SymTensorField::from_values(*self.grid(), comps.each_ref().map(|v| v.as_slice())))
    }

    /// Pointwise dot product sampled on the grid.
    pub fn dot(&self, other: &Self) -> Result<ScalarField<T>> {
        self.grid().check_same(other.grid())?;
        let a = self.values();
        let b = other.values();
        let vals: Vec<T> = (0..a[0].len())
            .map(|i| a[0][i] * b[0][i] + a[1][i] * b[1][i] + a[2][i] * b[2][i])
            .collect();
        Ok(ScalarField::from_values(*self.grid(), &vals))
    }
}

/// Symmetric 3x3 tensor field; components ordered
/// `[xx, xy, xz, yy, yz, zz]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField<T: Real> {
    pub components: [ScalarField<T>; 6],
}

/// Map `(i, j)` with `i <= j` to the packed component index.
#[inline]
pub fn sym_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        (2, 2) => 5,
        _ => unreachable!(),
    }
}

impl<T: Real> SymTensorField<T> {
    pub fn zeros(grid: Grid) -> Self {
        SymTensorField {
            components: std::array::from_fn(|_| ScalarField::zeros(grid)),
        }
    }

    pub fn from_values(grid: Grid, values: [&[T]; 6]) -> Self {
        SymTensorField {
            components: std::array::from_fn(|i| ScalarField::from_values(grid, values[i])),
        }
    }

    pub fn from_components(components: [ScalarField<T>; 6]) -> Result<Self> {
        for i in 1..6 {
            components[0].grid().check_same(components[i].grid())?;
        }
        Ok(SymTensorField { components })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn values(&self) -> [Vec<T>; 6] {
        std::array::from_fn(|i| self.components[i].values())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid().check_same(other.grid())?;
        Ok(SymTensorField {
            components: std::array::from_fn(|i| {
                self.components[i].add(&other.components[i]).unwrap()
            }),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid().check_same(other.grid())?;
        Ok(SymTensorField {
            components: std::array::from_fn(|i| {
                self.components[i].sub(&other.components[i]).unwrap()
            }),
        })
    }

    pub fn scale(&self, factor: T) -> Self {
        SymTensorField {
            components: std::array::from_fn(|i| self.components[i].scale(factor)),
        }
    }

    /// Trace as a scalar field.
    pub fn trace(&self) -> Result<ScalarField<T>> {
        self.components[0]
            .add(&self.components[3])?
            .add(&self.components[5])
    }

    /// Remove the trace part: `S - (tr S / 3) Id`.
    pub fn traceless_part(&self) -> Result<Self> {
        let third = T::from_f64(1.0 / 3.0).unwrap();
        let tr3 = self.trace()?.scale(third);
        let mut comps = self.components.clone();
        comps[0] = comps[0].sub(&tr3)?;
        comps[3] = comps[3].sub(&tr3)?;
        comps[5] = comps[5].sub(&tr3)?;
        Ok(SymTensorField { components: comps })
    }

    /// `max |trace|` over the grid.
    pub fn trace_linf(&self) -> T {
        self.trace()
            .unwrap()
            .values()
            .iter()
            .fold(T::zero(), |a, &b| if b.abs() > a { b.abs() } else { a })
    }

    /// Largest pointwise Frobenius norm over the grid.
    pub fn frobenius_linf(&self) -> T {
        let v = self.values();
        let two = T::from_f64(2.0).unwrap();
        let mut worst = T::zero();
        for i in 0..v[0].len() {
            let m = (v[0][i] * v[0][i]
                + v[3][i] * v[3][i]
                + v[5][i] * v[5][i]
                + two * (v[1][i] * v[1][i] + v[2][i] * v[2][i] + v[4][i] * v[4][i]))
                .sqrt();
            if m > worst {
                worst = m;
            }
        }
        worst
    }

    /// Asserts the traceless flag: `|trace|_inf <= tol * |S|_inf`.
    pub fn is_traceless(&self, tol: T) -> bool {
        let scale = self.frobenius_linf();
        if scale == T::zero() {
            return true;
        }
        self.trace_linf() <= tol * scale
    }
}

/// Assert-and-describe helper joining two grids.
pub fn same_grid<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) -> Result<Grid> {
    a.grid().check_same(b.grid())?;
    Ok(*a.grid())
}

pub use crate::error::Result as FieldResult;

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::spatial(16).unwrap()
    }

    #[test]
    fn round_trip_and_mean() {
        let g = grid();
        let vals: Vec<f64> = (0..g.len())
            .map(|i| {
                let iz = i % g.n;
                1.0 + (g.coord(iz)).cos()
            })
            .collect();
        let f = ScalarField::from_values(g, &vals);
        assert!((f.mean() - 1.0).abs() < 1e-13);
        let back = f.values();
        for (a, b) in back.iter().zip(&vals) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(f.hermitian_error() < 1e-14);
    }

    #[test]
    fn pointwise_and_dealiased_products_agree_when_band_limited() {
        let g = grid();
        let mk = |k: f64| -> Vec<f64> {
            (0..g.len())
                .map(|i| {
                    let ix = i / (g.n * g.n);
                    (k * g.coord(ix)).cos()
                })
                .collect()
        };
        let f = ScalarField::from_values(g, &mk(1.0));
        let h = ScalarField::from_values(g, &mk(2.0));
        let p1 = f.pointwise_mul(&h).unwrap();
        let p2 = f.dealiased_mul(&h).unwrap();
        // Bandwidths 1 and 2: the product (bandwidth 3) is exactly
        // representable, so both routes agree.
        let d = p1.sub(&p2).unwrap();
        assert!(d.coeff_linf() < 1e-13);
    }

    #[test]
    fn tensor_trace_tools() {
        let g = grid();
        let ones = vec![1.0f64; g.len()];
        let zeros = vec![0.0f64; g.len()];
        let s = SymTensorField::from_values(
            g,
            [&ones, &zeros, &zeros, &ones, &zeros, &ones],
        );
        assert!((s.trace_linf() - 3.0).abs() < 1e-12);
        let tl = s.traceless_part().unwrap();
        assert!(tl.trace_linf() < 1e-12);
        assert!(tl.is_traceless(1e-12));
    }
}
