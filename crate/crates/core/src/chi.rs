//! The amplitude-shaping function `chi`: identity-like rescaling of the
//! stress magnitude. `chi(z) = 1` on `[0, 1]`, `chi(z) = z` on `[2, inf)`,
//! a quintic-smoothstep blend of the two branches on `(1, 2)`, satisfying
//! `z <= 2 chi(z) <= 4 z` there and `chi(z) >= 1` everywhere.

use crate::scalar::Real;

/// Quintic smoothstep `6u^5 - 15u^4 + 10u^3` with clamping.
#[inline]
fn smoothstep<T: Real>(u: T) -> T {
    if u <= T::zero() {
        T::zero()
    } else if u >= T::one() {
        T::one()
    } else {
        let c6 = T::from_f64(6.0).unwrap();
        let c15 = T::from_f64(15.0).unwrap();
        let c10 = T::from_f64(10.0).unwrap();
        ((c6 * u - c15) * u + c10) * u * u * u
    }
}

#[inline]
fn smoothstep_deriv<T: Real>(u: T) -> T {
    if u <= T::zero() || u >= T::one() {
        T::zero()
    } else {
        let c30 = T::from_f64(30.0).unwrap();
        let one = T::one();
        c30 * u * u * (u - one) * (u - one)
    }
}

/// `chi(z)` for `z >= 0`.
#[inline]
pub fn chi<T: Real>(z: T) -> T {
    if z <= T::one() {
        T::one()
    } else if z >= T::one() + T::one() {
        z
    } else {
        let u = z - T::one();
        T::one() + smoothstep(u) * u
    }
}

/// Derivative of `chi`.
#[inline]
pub fn chi_deriv<T: Real>(z: T) -> T {
    if z <= T::one() {
        T::zero()
    } else if z >= T::one() + T::one() {
        T::one()
    } else {
        let u = z - T::one();
        smoothstep_deriv(u) * u + smoothstep(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_values() {
        assert_eq!(chi(0.0f64), 1.0);
        assert_eq!(chi(1.0f64), 1.0);
        assert_eq!(chi(2.0f64), 2.0);
        assert_eq!(chi(7.5f64), 7.5);
    }

    #[test]
    fn blend_inequalities_dense() {
        // z <= 2 chi(z) <= 4 z on (1, 2), chi >= 1 everywhere.
        for i in 0..=10_000 {
            let z = 1.0 + i as f64 / 10_000.0;
            let c = chi(z);
            assert!(c >= 1.0, "chi({z}) = {c} < 1");
            assert!(z <= 2.0 * c + 1e-14, "z = {z}, 2 chi = {}", 2.0 * c);
            assert!(2.0 * c <= 4.0 * z + 1e-14, "z = {z}, 2 chi = {}", 2.0 * c);
        }
        for i in 0..=1000 {
            let z = 5.0 * i as f64 / 1000.0;
            assert!(chi(z) >= 1.0);
            assert!(chi(z) >= z / 2.0);
        }
    }

    #[test]
    fn derivative_consistent() {
        for i in 1..200 {
            let z = 0.02 * i as f64;
            let h = 1e-6;
            let fd = (chi(z + h) - chi(z - h)) / (2.0 * h);
            assert!((fd - chi_deriv(z)).abs() < 1e-8, "z = {z}");
        }
    }
}
