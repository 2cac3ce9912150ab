//! Prescribed kinetic-energy profile `e(t) = int |v|^2 dx + g(t)` with the
//! pinning function `g` ranging over `[eps1/2, eps1]` and
//! `g'(t0)` exceeding the measured slope of the kinetic energy.

use crate::timeseries::TimeSeries;
use serde::Serialize;

/// Logistic ramp from `eps1/2` to `eps1` centred at `center`:
/// `g(t) = eps1/2 + (eps1/2) * sigmoid(rate (t - center))`,
/// `g'(center) = eps1 * rate / 8`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PinningFunction {
    pub eps1: f64,
    pub center: f64,
    pub rate: f64,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl PinningFunction {
    pub fn value(&self, t: f64) -> f64 {
        0.5 * self.eps1 * (1.0 + sigmoid(self.rate * (t - self.center)))
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let s = sigmoid(self.rate * (t - self.center));
        0.5 * self.eps1 * self.rate * s * (1.0 - s)
    }

    pub fn slope_at_center(&self) -> f64 {
        self.eps1 * self.rate / 8.0
    }
}

/// Energy profile: kinetic-energy trace of the state plus the pinning ramp.
#[derive(Debug, Clone)]
pub struct EnergyProfile {
    /// `int |v(t)|^2 dx` sampled on the time grid (with derivative track).
    pub kinetic: TimeSeries<f64>,
    pub g: PinningFunction,
    /// Measured `sup_t |d/dt int |v|^2|` over the window.
    pub slope_bound: f64,
}

impl EnergyProfile {
    /// Build from the kinetic trace; the ramp slope is `slope_factor`
    /// times the measured bound (strictly above it for any factor > 1).
    pub fn pinned(kinetic: TimeSeries<f64>, eps1: f64, slope_factor: f64) -> Self {
        let mut bound = 0.0f64;
        for i in 0..kinetic.nt() {
            bound = bound.max(kinetic.deriv_at(i).abs());
        }
        // Degenerate (e.g. zero initial field): any positive slope works.
        let effective = bound.max(1e-12);
        let rate = 8.0 * slope_factor * effective / eps1;
        EnergyProfile {
            g: PinningFunction {
                eps1,
                center: kinetic.grid.t0,
                rate,
            },
            slope_bound: bound,
            kinetic,
        }
    }

    /// `e(t_i)`.
    pub fn value(&self, i: usize) -> f64 {
        self.kinetic.values[i] + self.g.value(self.kinetic.grid.time(i))
    }

    /// `e'(t_i)`.
    pub fn deriv(&self, i: usize) -> f64 {
        self.kinetic.deriv_at(i) + self.g.deriv(self.kinetic.grid.time(i))
    }

    /// The invariant `g'(t0) > sup |d/dt int |v|^2|`.
    pub fn slope_ok(&self) -> bool {
        self.g.slope_at_center() > self.slope_bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn pinning_range_and_slope() {
        let g = Grid::new(8, 33, 0.5, 0.01).unwrap();
        let kin: Vec<f64> = (0..g.nt).map(|i| (-2.0 * g.time(i)).exp()).collect();
        let ts = TimeSeries::new(g, kin);
        let profile = EnergyProfile::pinned(ts, 1e-4, 2.0);
        assert!(profile.slope_ok());
        for i in 0..g.nt {
            let gv = profile.g.value(g.time(i));
            assert!(gv >= 0.5e-4 - 1e-18 && gv <= 1e-4 + 1e-18);
        }
        // e = kinetic + g at every sample by construction.
        for i in 0..g.nt {
            let e = profile.value(i);
            assert!((e - (profile.kinetic.values[i] + profile.g.value(g.time(i)))).abs() == 0.0);
        }
    }
}
