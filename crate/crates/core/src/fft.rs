//! 3-D complex FFTs on the cubic grid, built from 1-D `rustfft` plans.
//!
//! Layout convention: flattened `n^3` buffers with the z index fastest.
//! The forward transform carries the `1/n^3` normalization so that spectral
//! buffers hold actual Fourier coefficients: `f(x) = sum_k c_k e^{i k.x}`.

use crate::scalar::Real;
use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct Fft3<T: Real> {
    n: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> Fft3<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Fft3 { n, fwd, inv }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// In-place forward transform; output holds Fourier coefficients.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.all_axes(data, false);
        let scale = T::one() / T::from_usize(self.n * self.n * self.n).unwrap();
        data.par_iter_mut().for_each(|v| *v = v.scale(scale));
    }

    /// In-place inverse transform from Fourier coefficients to samples.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.all_axes(data, true);
    }

    fn all_axes(&self, data: &mut [Complex<T>], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer does not match grid size");
        // z axis: rows are contiguous.
        self.fft_rows(data, inverse);
        // y axis: swap y<->z, transform rows, swap back.
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); n * n * n];
        transpose12(n, data, &mut scratch);
        self.fft_rows(&mut scratch, inverse);
        transpose12(n, &scratch, data);
        // x axis: swap x<->z, transform rows, swap back.
        transpose02(n, data, &mut scratch);
        self.fft_rows(&mut scratch, inverse);
        transpose02(n, &scratch, data);
    }

    fn fft_rows(&self, data: &mut [Complex<T>], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.inv } else { &self.fwd };
        data.par_chunks_mut(n * n).for_each(|slab| {
            plan.process(slab);
        });
    }
}

/// `(ix, iy, iz) -> (ix, iz, iy)`.
fn transpose12<T: Copy + Send + Sync>(n: usize, src: &[T], dst: &mut [T]) {
    dst.par_chunks_mut(n * n).enumerate().for_each(|(ix, slab)| {
        let base = ix * n * n;
        for iz in 0..n {
            for iy in 0..n {
                slab[iz * n + iy] = src[base + iy * n + iz];
            }
        }
    });
}

/// `(ix, iy, iz) -> (iz, iy, ix)`.
fn transpose02<T: Copy + Send + Sync>(n: usize, src: &[T], dst: &mut [T]) {
    dst.par_chunks_mut(n * n).enumerate().for_each(|(iz, slab)| {
        for iy in 0..n {
            for ix in 0..n {
                slab[iy * n + ix] = src[(ix * n + iy) * n + iz];
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let n = 8;
        let fft = Fft3::<f64>::new(n);
        let mut data: Vec<Complex<f64>> = (0..n * n * n)
            .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let orig = data.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode() {
        // f(x) = e^{i k.x} with k = (1, 0, 2) has a single unit coefficient.
        let n = 8;
        let fft = Fft3::<f64>::new(n);
        let h = std::f64::consts::TAU / n as f64;
        let mut data = vec![Complex::new(0.0, 0.0); n * n * n];
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let phase = h * (ix as f64 + 2.0 * iz as f64);
                    data[(ix * n + iy) * n + iz] = Complex::new(phase.cos(), phase.sin());
                }
            }
        }
        fft.forward(&mut data);
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let c = data[(ix * n + iy) * n + iz];
                    let expect = if ix == 1 && iy == 0 && iz == 2 { 1.0 } else { 0.0 };
                    assert!((c - Complex::new(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
    }
}
