//! Time-sampled objects over the window `B_{2s}(t0)`, with an optional
//! exact derivative track and discrete time mollification.
//!
//! Jet-bearing quantities oscillate far faster than any reasonable time
//! grid, so every construction that knows its time derivative in closed
//! form carries it alongside the samples ("dual" track). Stencil
//! differentiation is the fallback for sampled-only data.

use crate::field::{ScalarField, SymTensorField, VectorField};
use crate::grid::Grid;
use crate::scalar::Real;

/// Linear-space operations needed for stencils and convolution.
pub trait LinearOps: Clone + Send + Sync {
    fn zero_like(x: &Self) -> Self;
    fn scaled(x: &Self, coeff: f64) -> Self;
    fn axpy(&mut self, coeff: f64, x: &Self);
    /// Cheap zero test (early-exit scan); lets series ops skip dead work.
    fn is_zero(&self) -> bool {
        false
    }
}

/// Arc wrapper: time series share unchanged samples instead of cloning
/// multi-megabyte fields.
impl<F: LinearOps> LinearOps for std::sync::Arc<F> {
    fn zero_like(x: &Self) -> Self {
        std::sync::Arc::new(F::zero_like(x))
    }
    fn scaled(x: &Self, coeff: f64) -> Self {
        if coeff == 1.0 {
            x.clone()
        } else {
            std::sync::Arc::new(F::scaled(x, coeff))
        }
    }
    fn axpy(&mut self, coeff: f64, x: &Self) {
        let mut inner = (**self).clone();
        inner.axpy(coeff, x);
        *self = std::sync::Arc::new(inner);
    }
    fn is_zero(&self) -> bool {
        (**self).is_zero()
    }
}

impl<T: Real> LinearOps for ScalarField<T> {
    fn zero_like(x: &Self) -> Self {
        ScalarField::zeros(*x.grid())
    }
    fn scaled(x: &Self, coeff: f64) -> Self {
        x.scale(T::from_f64(coeff).unwrap())
    }
    fn axpy(&mut self, coeff: f64, x: &Self) {
        *self = self.add(&x.scale(T::from_f64(coeff).unwrap())).unwrap();
    }
    fn is_zero(&self) -> bool {
        self.coeffs().iter().all(|c| c.re == T::zero() && c.im == T::zero())
    }
}

impl<T: Real> LinearOps for VectorField<T> {
    fn zero_like(x: &Self) -> Self {
        VectorField::zeros(*x.grid())
    }
    fn scaled(x: &Self, coeff: f64) -> Self {
        x.scale(T::from_f64(coeff).unwrap())
    }
    fn axpy(&mut self, coeff: f64, x: &Self) {
        *self = self.add(&x.scale(T::from_f64(coeff).unwrap())).unwrap();
    }
    fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }
}

impl<T: Real> LinearOps for SymTensorField<T> {
    fn zero_like(x: &Self) -> Self {
        SymTensorField::zeros(*x.grid())
    }
    fn scaled(x: &Self, coeff: f64) -> Self {
        x.scale(T::from_f64(coeff).unwrap())
    }
    fn axpy(&mut self, coeff: f64, x: &Self) {
        *self = self.add(&x.scale(T::from_f64(coeff).unwrap())).unwrap();
    }
    fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }
}

impl LinearOps for f64 {
    fn zero_like(_: &Self) -> Self {
        0.0
    }
    fn scaled(x: &Self, coeff: f64) -> Self {
        x * coeff
    }
    fn axpy(&mut self, coeff: f64, x: &Self) {
        *self += coeff * x;
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

/// Samples over the time window, optionally with the exact derivative.
#[derive(Debug, Clone)]
pub struct TimeSeries<F: LinearOps> {
    pub grid: Grid,
    pub values: Vec<F>,
    pub derivs: Option<Vec<F>>,
}

impl<F: LinearOps> TimeSeries<F> {
    pub fn new(grid: Grid, values: Vec<F>) -> Self {
        assert_eq!(values.len(), grid.nt);
        TimeSeries {
            grid,
            values,
            derivs: None,
        }
    }

    pub fn with_derivs(grid: Grid, values: Vec<F>, derivs: Vec<F>) -> Self {
        assert_eq!(values.len(), grid.nt);
        assert_eq!(derivs.len(), grid.nt);
        TimeSeries {
            grid,
            values,
            derivs: Some(derivs),
        }
    }

    pub fn nt(&self) -> usize {
        self.grid.nt
    }

    /// 4th-order centred stencil (2nd-order one-sided at the edges).
    pub fn stencil_deriv_at(&self, i: usize) -> F {
        let dt = self.grid.dt();
        let n = self.values.len();
        let mut out = F::zero_like(&self.values[i]);
        if i >= 2 && i + 2 < n {
            out.axpy(1.0 / (12.0 * dt), &self.values[i - 2]);
            out.axpy(-8.0 / (12.0 * dt), &self.values[i - 1]);
            out.axpy(8.0 / (12.0 * dt), &self.values[i + 1]);
            out.axpy(-1.0 / (12.0 * dt), &self.values[i + 2]);
        } else if i == 0 {
            out.axpy(-1.5 / dt, &self.values[0]);
            out.axpy(2.0 / dt, &self.values[1]);
            out.axpy(-0.5 / dt, &self.values[2]);
        } else if i == n - 1 {
            out.axpy(1.5 / dt, &self.values[n - 1]);
            out.axpy(-2.0 / dt, &self.values[n - 2]);
            out.axpy(0.5 / dt, &self.values[n - 3]);
        } else {
            out.axpy(-0.5 / dt, &self.values[i - 1]);
            out.axpy(0.5 / dt, &self.values[i + 1]);
        }
        out
    }

    /// Exact derivative when carried, stencil otherwise.
    pub fn deriv_at(&self, i: usize) -> F {
        match &self.derivs {
            Some(d) => d[i].clone(),
            None => self.stencil_deriv_at(i),
        }
    }

    pub fn map<G: LinearOps>(&self, f: impl Fn(&F) -> G) -> TimeSeries<G> {
        TimeSeries {
            grid: self.grid,
            values: self.values.iter().map(&f).collect(),
            derivs: self.derivs.as_ref().map(|d| d.iter().map(&f).collect()),
        }
    }

    /// Discrete convolution with a centred kernel, extending by zero
    /// outside the window; the derivative track is convolved with the same
    /// kernel (convolution commutes with d/dt). Samples with no nonzero
    /// contribution all share one zero object.
    pub fn mollified(&self, kernel: &[f64]) -> TimeSeries<F> {
        self.mollified_range(kernel, 0, self.values.len())
    }

    /// Like [`Self::mollified`], but only samples in `range_lo..range_hi`
    /// are convolved; the rest are shared unchanged from the input. Used
    /// when downstream consumers only look inside a cutoff's support.
    pub fn mollified_range(
        &self,
        kernel: &[f64],
        range_lo: usize,
        range_hi: usize,
    ) -> TimeSeries<F> {
        let conv = |series: &Vec<F>| -> Vec<F> {
            let n = series.len();
            let half = kernel.len() / 2;
            let zero = F::zero_like(&series[0]);
            (0..n)
                .map(|i| {
                    if i < range_lo || i >= range_hi {
                        return series[i].clone();
                    }
                    let mut acc: Option<F> = None;
                    for (j, &w) in kernel.iter().enumerate() {
                        let src = i as i64 + j as i64 - half as i64;
                        if src >= 0 && (src as usize) < n && w != 0.0 {
                            let s = &series[src as usize];
                            if !s.is_zero() {
                                acc.get_or_insert_with(|| F::zero_like(s)).axpy(w, s);
                            }
                        }
                    }
                    acc.unwrap_or_else(|| zero.clone())
                })
                .collect()
        };
        TimeSeries {
            grid: self.grid,
            values: conv(&self.values),
            derivs: self.derivs.as_ref().map(conv),
        }
    }
}

/// Centred time-mollification kernel of (discrete) 4th order: a sampled
/// bump, normalized to unit sum, with its discrete second moment removed
/// by a second-difference correction. Sum is exactly 1, odd moments vanish
/// by symmetry, the second moment vanishes by construction.
pub fn time_kernel(half_width_steps: usize) -> Vec<f64> {
    let h = half_width_steps.max(1);
    let m = 2 * h + 1;
    let mut k: Vec<f64> = (0..m)
        .map(|j| {
            let u = (j as f64 - h as f64) / (h as f64 + 0.5);
            if u.abs() >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - u * u)).exp()
            }
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for v in k.iter_mut() {
        *v /= sum;
    }
    let m2: f64 = k
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let d = j as f64 - h as f64;
            d * d * v
        })
        .sum();
    // Subtract (m2/2) * delta'' so the discrete second moment vanishes.
    k[h - 1] -= m2 / 2.0;
    k[h] += m2;
    k[h + 1] -= m2 / 2.0;
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(8, 33, 0.5, 0.01).unwrap()
    }

    #[test]
    fn stencil_matches_analytic() {
        let g = grid();
        let values: Vec<f64> = (0..g.nt).map(|i| (3.0 * g.time(i)).sin()).collect();
        let ts = TimeSeries::new(g, values);
        for i in 2..g.nt - 2 {
            let want = 3.0 * (3.0 * g.time(i)).cos();
            let got = ts.stencil_deriv_at(i);
            assert!((got - want).abs() < 1e-8, "i = {i}: {got} vs {want}");
        }
    }

    #[test]
    fn kernel_moments() {
        let k = time_kernel(4);
        let h = k.len() / 2;
        let sum: f64 = k.iter().sum();
        assert!((sum - 1.0).abs() < 1e-14);
        let m1: f64 = k
            .iter()
            .enumerate()
            .map(|(j, &v)| (j as f64 - h as f64) * v)
            .sum();
        assert!(m1.abs() < 1e-14);
        let m2: f64 = k
            .iter()
            .enumerate()
            .map(|(j, &v)| (j as f64 - h as f64).powi(2) * v)
            .sum();
        assert!(m2.abs() < 1e-14);
    }

    #[test]
    fn mollification_preserves_constants_in_the_interior() {
        let g = grid();
        let ts = TimeSeries::new(g, vec![2.5f64; g.nt]);
        let k = time_kernel(3);
        let m = ts.mollified(&k);
        for i in 4..g.nt - 4 {
            assert!((m.values[i] - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn mollification_fourth_order_on_smooth_data() {
        let g = grid();
        let f = |t: f64| (-2.0 * t).exp();
        let ts = TimeSeries::new(g, (0..g.nt).map(|i| f(g.time(i))).collect());
        let k = time_kernel(3);
        let m = ts.mollified(&k);
        let dt = g.dt();
        for i in 5..g.nt - 5 {
            let rel = (m.values[i] - f(g.time(i))).abs() / f(g.time(i));
            // Second moment removed: error is O(dt^4) with a small constant.
            assert!(rel < 50.0 * dt.powi(4), "i = {i}: rel = {rel:e}");
        }
    }
}
