//! `L^p` and `C^N` norms on the uniform grid.
//!
//! `L^p` uses trapezoidal quadrature on the periodic grid (the grid average
//! times the torus volume); `p = inf` and `C^N` evaluate on a 2x-refined
//! grid (spectral interpolation) to suppress sup-norm underestimation,
//! falling back to the carrier grid when the refinement would be very large.

use super::{ScalarField, VectorField};
use crate::error::{CoreError, Result};
use crate::scalar::{torus_volume, Real};

/// Largest refined-grid size (points) for which refinement is attempted.
const REFINE_LIMIT: usize = 1 << 25;

/// `L^p` norm of the samples `values` on a grid with `n3` points.
pub fn lp_norm_values<T: Real>(values: &[T], p: f64) -> Result<T> {
    if p < 1.0 {
        return Err(CoreError::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(values
            .iter()
            .fold(T::zero(), |a, &b| if b.abs() > a { b.abs() } else { a }));
    }
    let pt = T::from_f64(p).unwrap();
    let sum: T = values.iter().map(|&v| v.abs().powf(pt)).sum();
    let mean = sum / T::from_usize(values.len()).unwrap();
    Ok((mean * torus_volume::<T>()).powf(T::one() / pt))
}

/// `L^p` norm of a scalar field, `p` in `[1, inf]`.
pub fn lp_norm<T: Real>(f: &ScalarField<T>, p: f64) -> Result<T> {
    if p < 1.0 {
        return Err(CoreError::InvalidExponent(p));
    }
    if p.is_infinite() {
        let factor = if 8 * f.grid().len() <= REFINE_LIMIT { 2 } else { 1 };
        return lp_norm_values(&f.values_refined(factor), p);
    }
    lp_norm_values(&f.values(), p)
}

/// Parseval route to the squared `L^2` norm: `(2 pi)^3 * sum |c_k|^2`.
pub fn parseval_l2<T: Real>(f: &ScalarField<T>) -> T {
    let sum: T = f.coeffs().iter().map(|c| c.norm_sqr()).sum();
    (sum * torus_volume::<T>()).sqrt()
}

/// `C^N` norm: max over the (refined) grid of every spectral derivative
/// `d^alpha f` with `|alpha| <= N`.
pub fn c_norm<T: Real>(f: &ScalarField<T>, order: usize) -> Result<T> {
    let factor = if 8 * f.grid().len() <= REFINE_LIMIT { 2 } else { 1 };
    let mut worst = T::zero();
    for ax in 0..=order {
        for ay in 0..=(order - ax) {
            for az in 0..=(order - ax - ay) {
                let df = derivative_multi(f, ax, ay, az);
                let m = lp_norm_values(&df.values_refined(factor), f64::INFINITY)?;
                if m > worst {
                    worst = m;
                }
            }
        }
    }
    Ok(worst)
}

/// `C^N` norm of a vector field (max over components).
pub fn c_norm_vector<T: Real>(v: &VectorField<T>, order: usize) -> Result<T> {
    let mut worst = T::zero();
    for c in &v.components {
        let m = c_norm(c, order)?;
        if m > worst {
            worst = m;
        }
    }
    Ok(worst)
}

/// `d^(ax, ay, az) f` via spectral multipliers.
pub fn derivative_multi<T: Real>(
    f: &ScalarField<T>,
    ax: usize,
    ay: usize,
    az: usize,
) -> ScalarField<T> {
    f.multiplier(|kx, ky, kz| {
        let mut m = num_complex::Complex::new(T::one(), T::zero());
        let i = |k: i64| num_complex::Complex::new(T::zero(), T::from_i64(k).unwrap());
        for _ in 0..ax {
            m *= i(kx);
        }
        for _ in 0..ay {
            m *= i(ky);
        }
        for _ in 0..az {
            m *= i(kz);
        }
        m
    })
}

/// Max over multi-indices of order exactly `j` of the `L^p` norm of
/// `d^alpha f`; the derivative-magnitude measure used by the appendix
/// checks.
pub fn grad_order_lp<T: Real>(f: &ScalarField<T>, j: usize, p: f64) -> Result<T> {
    let mut worst = T::zero();
    for ax in 0..=j {
        for ay in 0..=(j - ax) {
            let az = j - ax - ay;
            let df = derivative_multi(f, ax, ay, az);
            let m = lp_norm(&df, p)?;
            if m > worst {
                worst = m;
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_scalar;
    use crate::grid::Grid;

    #[test]
    fn norm_of_one() {
        let g = Grid::spatial(16).unwrap();
        let f = ScalarField::constant(g, 1.0f64);
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let got = lp_norm(&f, p).unwrap();
            let expect = if p.is_infinite() {
                1.0
            } else {
                (std::f64::consts::TAU.powi(3)).powf(1.0 / p)
            };
            assert!((got - expect).abs() < 1e-10, "p={p}: {got} vs {expect}");
        }
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn norm_of_sin() {
        let g = Grid::spatial(16).unwrap();
        let vals: Vec<f64> = (0..g.len())
            .map(|i| {
                let ix = i / (g.n * g.n);
                g.coord(ix).sin()
            })
            .collect();
        let f = ScalarField::from_values(g, &vals);
        let l2 = lp_norm(&f, 2.0).unwrap();
        let expect = (std::f64::consts::TAU.powi(3) / 2.0).sqrt();
        assert!((l2 - expect).abs() < 1e-10);
        assert!((lp_norm(&f, f64::INFINITY).unwrap() - 1.0).abs() < 1e-9);
        // zero field
        let z = ScalarField::zeros(g);
        assert_eq!(lp_norm(&z, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn parseval_matches_quadrature() {
        let g = Grid::spatial(16).unwrap();
        let f = random_scalar::<f64>(g, 5, 23);
        let a = lp_norm(&f, 2.0).unwrap();
        let b = parseval_l2(&f);
        assert!((a - b).abs() <= 1e-10 * b.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn c1_of_sin() {
        let g = Grid::spatial(16).unwrap();
        let vals: Vec<f64> = (0..g.len())
            .map(|i| {
                let ix = i / (g.n * g.n);
                g.coord(ix).sin()
            })
            .collect();
        let f = ScalarField::from_values(g, &vals);
        let c1 = c_norm(&f, 1).unwrap();
        assert!((c1 - 1.0).abs() < 1e-9, "c1 = {c1}");
    }

    #[test]
    fn mixed_partials_commute() {
        let g = Grid::spatial(16).unwrap();
        let f = random_scalar::<f64>(g, 5, 29);
        let dxy = derivative_multi(&derivative_multi(&f, 1, 0, 0), 0, 1, 0);
        let dyx = derivative_multi(&derivative_multi(&f, 0, 1, 0), 1, 0, 0);
        let d = dxy.sub(&dyx).unwrap();
        assert!(d.coeff_linf() < 1e-12);
    }
}
