//! Smooth time cutoffs with exact plateaus and exact compact support,
//! built from the standard `exp(-1/u)` partition function.

use crate::params::TimeInterval;
use serde::Serialize;

/// `f(u) = exp(-1/u)` for `u > 0`, else `0`; the C-infinity step
/// `S(u) = f(u) / (f(u) + f(1-u))` is exactly 0 for `u <= 0` and exactly 1
/// for `u >= 1`.
fn part(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn part_deriv(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp() / (u * u)
    }
}

/// Smooth step and its derivative.
pub fn smooth_step(u: f64) -> (f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0);
    }
    let a = part(u);
    let b = part(1.0 - u);
    let da = part_deriv(u);
    let db = -part_deriv(1.0 - u);
    let s = a / (a + b);
    let ds = (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
    (s, ds)
}

/// Smooth time cutoff: exactly `1` on the plateau `|t - center| <= plateau`,
/// exactly `0` outside `|t - center| >= support`, C-infinity in between.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeCutoff {
    pub center: f64,
    pub plateau: f64,
    pub support: f64,
}

impl TimeCutoff {
    /// Cutoff that is 1 on `plateau_iv` and supported in `support_iv`
    /// (same centre required).
    pub fn bridging(plateau_iv: &TimeInterval, support_iv: &TimeInterval) -> Self {
        assert!(
            (plateau_iv.center - support_iv.center).abs() < 1e-15,
            "cutoff intervals must share their centre"
        );
        assert!(
            support_iv.half_width > plateau_iv.half_width,
            "support must strictly contain the plateau"
        );
        TimeCutoff {
            center: plateau_iv.center,
            plateau: plateau_iv.half_width,
            support: support_iv.half_width,
        }
    }

    /// Value and time-derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let x = (t - self.center).abs();
        if x <= self.plateau {
            return (1.0, 0.0);
        }
        if x >= self.support {
            return (0.0, 0.0);
        }
        let w = self.support - self.plateau;
        let u = (self.support - x) / w;
        let (s, ds) = smooth_step(u);
        let sign = if t >= self.center { 1.0 } else { -1.0 };
        (s, -sign * ds / w)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// Measured `max |d^N eta / dt^N|` for `N <= order`, by dense sampling
    /// (values and first derivative analytic, higher orders by central
    /// differences on the analytic first derivative).
    pub fn c_norm_record(&self, order: usize) -> Vec<f64> {
        let m = 40_001usize;
        let lo = self.center - self.support * 1.05;
        let hi = self.center + self.support * 1.05;
        let h = (hi - lo) / (m - 1) as f64;
        let vals: Vec<f64> = (0..m).map(|i| self.value(lo + h * i as f64)).collect();
        let mut out = Vec::with_capacity(order + 1);
        out.push(1.0);
        if order >= 1 {
            let d1: Vec<f64> = (0..m).map(|i| self.eval(lo + h * i as f64).1).collect();
            out.push(d1.iter().fold(0.0f64, |a, &b| a.max(b.abs())));
            let mut prev = d1;
            for _ in 2..=order {
                let next: Vec<f64> = (0..m)
                    .map(|i| {
                        if i == 0 || i == m - 1 {
                            0.0
                        } else {
                            (prev[i + 1] - prev[i - 1]) / (2.0 * h)
                        }
                    })
                    .collect();
                out.push(next.iter().fold(0.0f64, |a, &b| a.max(b.abs())));
                prev = next;
            }
        }
        let _ = vals;
        out
    }
}

/// The pair `(eta, eta~)` used by one step at level `q`:
/// `eta = 1` on `I_q`, supported in `I~_q`; `eta~ = 1` on `I~_q`,
/// supported in `I_(q+1)`.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffPair {
    pub eta: TimeCutoff,
    pub eta_tilde: TimeCutoff,
    /// `max |d^N eta|` for N = 0..=order used when building the record.
    pub eta_c_norms: Vec<f64>,
    pub eta_tilde_c_norms: Vec<f64>,
}

impl CutoffPair {
    pub fn for_level(
        i_q: &TimeInterval,
        i_tilde_q: &TimeInterval,
        i_q1: &TimeInterval,
    ) -> Self {
        let eta = TimeCutoff::bridging(i_q, i_tilde_q);
        let eta_tilde = TimeCutoff::bridging(i_tilde_q, i_q1);
        let eta_c_norms = eta.c_norm_record(3);
        let eta_tilde_c_norms = eta_tilde.c_norm_record(3);
        CutoffPair {
            eta,
            eta_tilde,
            eta_c_norms,
            eta_tilde_c_norms,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support_exact() {
        let c = TimeCutoff {
            center: 0.5,
            plateau: 0.05,
            support: 0.06,
        };
        assert_eq!(c.value(0.5), 1.0);
        assert_eq!(c.value(0.55), 1.0);
        assert_eq!(c.value(0.45), 1.0);
        assert_eq!(c.value(0.5601), 0.0);
        assert_eq!(c.value(0.4399), 0.0);
        let (v, _) = c.eval(0.5555);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn between_zero_and_one_and_derivative_matches() {
        let c = TimeCutoff {
            center: 0.0,
            plateau: 0.1,
            support: 0.3,
        };
        for i in -400..=400 {
            let t = i as f64 / 1000.0;
            let (v, dv) = c.eval(t);
            assert!((0.0..=1.0).contains(&v));
            let h = 1e-7;
            let fd = (c.value(t + h) - c.value(t - h)) / (2.0 * h);
            assert!((fd - dv).abs() < 1e-5, "t = {t}: {fd} vs {dv}");
        }
    }
}
