//! Smooth compactly supported profile functions with closed-form
//! derivatives.
//!
//! * `Phi(x1, x2) = c_phi * exp(-1/(1 - |x|^2))` on `|x| < 1` (2-D bump),
//! * `phi = -laplacian(Phi)` (zero average automatically),
//! * `psi(x) = c_psi * d/dx exp(-1/(1 - x^2))` (zero average automatically),
//!
//! normalized so that `(1/4 pi^2) int_{R^2} phi^2 = 1` and
//! `(1/2 pi) int_R psi^2 = 1`. The normalization constants are fixed by
//! refining trapezoid quadrature (the integrands are C-infinity with
//! compact support, so refinement converges extremely fast).

use crate::error::{CoreError, Result};
use crate::scalar::{c, Real};
use serde::Serialize;

/// `exp(-1/(1-s))` for `s < 1`, else 0 (as a function of `s = |x|^2`).
#[inline]
fn f_of_s<T: Real>(s: T) -> T {
    if s >= T::one() {
        T::zero()
    } else {
        (-T::one() / (T::one() - s)).exp()
    }
}

/// Normalized profile set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileSet<T: Real> {
    pub c_phi: T,
    pub c_psi: T,
    /// Measured `(1/4 pi^2) int phi^2` after normalization.
    pub phi_norm_check: f64,
    /// Measured `(1/2 pi) int psi^2` after normalization.
    pub psi_norm_check: f64,
}

impl<T: Real> ProfileSet<T> {
    /// 2-D potential `Phi` at `(x1, x2)`.
    #[inline]
    pub fn phi_cap(&self, x1: T, x2: T) -> T {
        let s = x1 * x1 + x2 * x2;
        self.c_phi * f_of_s(s)
    }

    /// Gradient of `Phi`.
    #[inline]
    pub fn phi_cap_grad(&self, x1: T, x2: T) -> [T; 2] {
        let s = x1 * x1 + x2 * x2;
        if s >= T::one() {
            return [T::zero(); 2];
        }
        let one = T::one();
        let f = f_of_s(s);
        let fp = -f / ((one - s) * (one - s));
        let two = one + one;
        [self.c_phi * fp * two * x1, self.c_phi * fp * two * x2]
    }

    /// Hessian of `Phi` as `[d11, d12, d22]`.
    #[inline]
    pub fn phi_cap_hess(&self, x1: T, x2: T) -> [T; 3] {
        let s = x1 * x1 + x2 * x2;
        if s >= T::one() {
            return [T::zero(); 3];
        }
        let one = T::one();
        let two = one + one;
        let four = two + two;
        let f = f_of_s(s);
        let om = one - s;
        let fp = -f / (om * om);
        let fpp = f * (one / (om * om * om * om) - two / (om * om * om));
        [
            self.c_phi * (fpp * four * x1 * x1 + fp * two),
            self.c_phi * (fpp * four * x1 * x2),
            self.c_phi * (fpp * four * x2 * x2 + fp * two),
        ]
    }

    /// `phi = -laplacian(Phi)` at `(x1, x2)`:
    /// `-4 c_phi F(s) (s^2 + s - 1) / (1 - s)^4`.
    #[inline]
    pub fn phi(&self, x1: T, x2: T) -> T {
        let s = x1 * x1 + x2 * x2;
        self.phi_of_s(s)
    }

    #[inline]
    fn phi_of_s(&self, s: T) -> T {
        if s >= T::one() {
            return T::zero();
        }
        let one = T::one();
        let four = c::<T>(4.0);
        let om = one - s;
        let p = s * s + s - one;
        -four * self.c_phi * f_of_s(s) * p / (om * om * om * om)
    }

    /// `d phi / ds` (radial derivative with respect to `s = |x|^2`).
    #[inline]
    fn phi_ds(&self, s: T) -> T {
        if s >= T::one() {
            return T::zero();
        }
        let one = T::one();
        let two = one + one;
        let four = c::<T>(4.0);
        let om = one - s;
        let p = s * s + s - one;
        let pp = two * s + one;
        let f = f_of_s(s);
        // d/ds [ F P / om^4 ] = F (-P + P' om^2 + 4 P om) / om^6.
        let num = -p + pp * om * om + four * p * om;
        -four * self.c_phi * f * num / (om * om * om * om * om * om)
    }

    /// Gradient of `phi`.
    #[inline]
    pub fn phi_grad(&self, x1: T, x2: T) -> [T; 2] {
        let s = x1 * x1 + x2 * x2;
        let d = self.phi_ds(s);
        let two = T::one() + T::one();
        [d * two * x1, d * two * x2]
    }

    /// 1-D zero-mean profile `psi(x) = -2 c_psi x G(x) / (1-x^2)^2` with
    /// `G = exp(-1/(1-x^2))`.
    #[inline]
    pub fn psi(&self, x: T) -> T {
        let s = x * x;
        if s >= T::one() {
            return T::zero();
        }
        let one = T::one();
        let two = one + one;
        let om = one - s;
        -two * self.c_psi * x * f_of_s(s) / (om * om)
    }

    /// First derivative of `psi`.
    #[inline]
    pub fn psi_d1(&self, x: T) -> T {
        let s = x * x;
        if s >= T::one() {
            return T::zero();
        }
        let one = T::one();
        let two = one + one;
        let three = c::<T>(3.0);
        let four = two + two;
        let om = one - s;
        let g = f_of_s(s);
        // G'' = G [ 4x^2/om^4 - 2(1+3x^2)/om^3 ].
        self.c_psi
            * g
            * (four * s / (om * om * om * om) - two * (one + three * s) / (om * om * om))
    }

    /// Second derivative of `psi`.
    #[inline]
    pub fn psi_d2(&self, x: T) -> T {
        let s = x * x;
        if s >= T::one() {
            return T::zero();
        }
        let one = T::one();
        let two = one + one;
        let om = one - s;
        let g = f_of_s(s);
        let vp = -two * x / (om * om);
        let vpp = -two * (one + c::<T>(3.0) * s) / (om * om * om);
        let vppp = -c::<T>(24.0) * x * (one + s) / (om * om * om * om);
        // G''' = G [ v'^3 + 3 v' v'' + v''' ].
        self.c_psi * g * (vp * vp * vp + c::<T>(3.0) * vp * vpp + vppp)
    }

    /// Third derivative of `psi`.
    #[inline]
    pub fn psi_d3(&self, x: T) -> T {
        let s = x * x;
        if s >= T::one() {
            return T::zero();
        }
        let one = T::one();
        let two = one + one;
        let om = one - s;
        let g = f_of_s(s);
        let vp = -two * x / (om * om);
        let vpp = -two * (one + c::<T>(3.0) * s) / (om * om * om);
        let vppp = -c::<T>(24.0) * x * (one + s) / (om * om * om * om);
        let vpppp = -c::<T>(24.0) * (one + c::<T>(10.0) * s + c::<T>(5.0) * s * s)
            / (om * om * om * om * om);
        // G'''' = G [ v'^4 + 6 v'^2 v'' + 3 v''^2 + 4 v' v''' + v'''' ].
        self.c_psi
            * g
            * (vp * vp * vp * vp
                + c::<T>(6.0) * vp * vp * vpp
                + c::<T>(3.0) * vpp * vpp
                + c::<T>(4.0) * vp * vppp
                + vpppp)
    }
}

/// Refining trapezoid quadrature on `[a, b]`; the integrands here are
/// C-infinity and flat at the endpoints, where trapezoid refinement
/// converges super-algebraically.
pub fn refine_quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut n = 64usize;
    let trap = |n: usize| -> f64 {
        let h = (b - a) / n as f64;
        let mut sum = 0.5 * (f(a) + f(b));
        for i in 1..n {
            sum += f(a + h * i as f64);
        }
        sum * h
    };
    let mut prev = trap(n);
    for _ in 0..16 {
        n *= 2;
        let next = trap(n);
        if (next - prev).abs() <= tol * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(CoreError::QuadratureNonConvergence(format!(
        "trapezoid refinement stalled at n = {n} (last delta relative to {prev:e})"
    )))
}

/// Build the normalized profile set.
pub fn make_profiles<T: Real>() -> Result<ProfileSet<T>> {
    let mut set = ProfileSet {
        c_phi: T::one(),
        c_psi: T::one(),
        phi_norm_check: 0.0,
        psi_norm_check: 0.0,
    };
    let tol = 1e-13;
    // int_{R^2} phi^2 = pi * int_0^1 phi(s)^2 ds (radially symmetric).
    let unit: ProfileSet<f64> = ProfileSet {
        c_phi: 1.0,
        c_psi: 1.0,
        phi_norm_check: 0.0,
        psi_norm_check: 0.0,
    };
    let i_phi = std::f64::consts::PI
        * refine_quadrature(|s| unit.phi_of_s(s).powi(2), 0.0, 1.0, tol)?;
    // (1/4 pi^2) c^2 I = 1.
    let c_phi = (4.0 * std::f64::consts::PI.powi(2) / i_phi).sqrt();
    // int_R psi^2 = 2 int_0^1 psi^2 (psi is odd).
    let i_psi = 2.0 * refine_quadrature(|x| unit.psi(x).powi(2), 0.0, 1.0, tol)?;
    let c_psi = (2.0 * std::f64::consts::PI / i_psi).sqrt();

    set.c_phi = c(c_phi);
    set.c_psi = c(c_psi);

    let check: ProfileSet<f64> = ProfileSet {
        c_phi,
        c_psi,
        phi_norm_check: 0.0,
        psi_norm_check: 0.0,
    };
    set.phi_norm_check = std::f64::consts::PI
        * refine_quadrature(|s| check.phi_of_s(s).powi(2), 0.0, 1.0, tol)?
        / (4.0 * std::f64::consts::PI.powi(2));
    set.psi_norm_check = 2.0 * refine_quadrature(|x| check.psi(x).powi(2), 0.0, 1.0, tol)?
        / (2.0 * std::f64::consts::PI);
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizations() {
        let p = make_profiles::<f64>().unwrap();
        assert!((p.phi_norm_check - 1.0).abs() < 1e-10, "{}", p.phi_norm_check);
        assert!((p.psi_norm_check - 1.0).abs() < 1e-10, "{}", p.psi_norm_check);
    }

    #[test]
    fn zero_means() {
        let p = make_profiles::<f64>().unwrap();
        // int phi = pi int_0^1 phi(s) ds = 0 (divergence theorem).
        let m_phi =
            std::f64::consts::PI * refine_quadrature(|s| p.phi_of_s(s), 0.0, 1.0, 1e-13).unwrap();
        assert!(m_phi.abs() < 1e-12, "int phi = {m_phi:e}");
        // int psi = 0 (derivative of a compactly supported function).
        let m_psi = refine_quadrature(|x| p.psi(x), -1.0, 1.0, 1e-13).unwrap();
        assert!(m_psi.abs() < 1e-12, "int psi = {m_psi:e}");
    }

    #[test]
    fn support_in_unit_ball() {
        let p = make_profiles::<f64>().unwrap();
        for x in [1.0, 1.0001, 2.0, -1.5] {
            assert_eq!(p.psi(x), 0.0);
            assert_eq!(p.phi(x, 0.0), 0.0);
            assert_eq!(p.phi_cap(x, 0.0), 0.0);
        }
    }

    #[test]
    fn phi_is_minus_laplacian_of_phi_cap() {
        // Central-difference Laplacian of Phi matches -phi.
        let p = make_profiles::<f64>().unwrap();
        let h = 1e-5;
        for (x, y) in [(0.1, 0.2), (0.5, -0.3), (0.0, 0.0), (0.7, 0.1)] {
            let lap = (p.phi_cap(x + h, y) + p.phi_cap(x - h, y) + p.phi_cap(x, y + h)
                + p.phi_cap(x, y - h)
                - 4.0 * p.phi_cap(x, y))
                / (h * h);
            let want = -p.phi(x, y);
            assert!((lap - want).abs() < 1e-5 * (1.0 + want.abs()), "at ({x},{y})");
        }
    }

    #[test]
    fn derivative_formulas_match_finite_differences() {
        let p = make_profiles::<f64>().unwrap();
        let h = 1e-6;
        for x in [-0.8, -0.3, 0.0, 0.2, 0.6, 0.9] {
            let fd1 = (p.psi(x + h) - p.psi(x - h)) / (2.0 * h);
            assert!((fd1 - p.psi_d1(x)).abs() < 1e-6 * (1.0 + fd1.abs()), "psi' at {x}");
            let fd2 = (p.psi_d1(x + h) - p.psi_d1(x - h)) / (2.0 * h);
            assert!((fd2 - p.psi_d2(x)).abs() < 1e-5 * (1.0 + fd2.abs()), "psi'' at {x}");
            let fd3 = (p.psi_d2(x + h) - p.psi_d2(x - h)) / (2.0 * h);
            assert!((fd3 - p.psi_d3(x)).abs() < 1e-4 * (1.0 + fd3.abs()), "psi''' at {x}");
        }
        for (x, y) in [(0.3, 0.4), (-0.2, 0.5), (0.05, -0.6)] {
            let g = p.phi_grad(x, y);
            let fd = (p.phi(x + h, y) - p.phi(x - h, y)) / (2.0 * h);
            assert!((g[0] - fd).abs() < 1e-5 * (1.0 + fd.abs()), "phi_x at ({x},{y})");
            let gc = p.phi_cap_grad(x, y);
            let fdc = (p.phi_cap(x, y + h) - p.phi_cap(x, y - h)) / (2.0 * h);
            assert!((gc[1] - fdc).abs() < 1e-7, "Phi_y at ({x},{y})");
            let hess = p.phi_cap_hess(x, y);
            let fdh = (p.phi_cap_grad(x + h, y)[1] - p.phi_cap_grad(x - h, y)[1]) / (2.0 * h);
            assert!((hess[1] - fdh).abs() < 1e-5 * (1.0 + fdh.abs()), "Phi_xy at ({x},{y})");
        }
    }
}
