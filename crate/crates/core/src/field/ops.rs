//! Spectral differential operators, projections, and the inverse-divergence
//! (Reynolds) operator.

use super::{ScalarField, SymTensorField, VectorField};
use crate::error::{CoreError, Result};
use crate::scalar::Real;
use num_complex::Complex;

#[inline]
fn ik<T: Real>(k: i64) -> Complex<T> {
    Complex::new(T::zero(), T::from_i64(k).unwrap())
}

/// Gradient of a scalar field.
pub fn grad<T: Real>(f: &ScalarField<T>) -> VectorField<T> {
    VectorField {
        components: [
            f.multiplier(|kx, _, _| ik(kx)),
            f.multiplier(|_, ky, _| ik(ky)),
            f.multiplier(|_, _, kz| ik(kz)),
        ],
    }
}

/// Divergence of a vector field.
pub fn div<T: Real>(v: &VectorField<T>) -> Result<ScalarField<T>> {
    let dx = v.components[0].multiplier(|kx, _, _| ik(kx));
    let dy = v.components[1].multiplier(|_, ky, _| ik(ky));
    let dz = v.components[2].multiplier(|_, _, kz| ik(kz));
    dx.add(&dy)?.add(&dz)
}

/// Row-wise divergence of a symmetric tensor: `(div S)_i = d_j S_ij`.
pub fn div_tensor<T: Real>(s: &SymTensorField<T>) -> Result<VectorField<T>> {
    let d = |c: usize, axis: usize| -> ScalarField<T> {
        match axis {
            0 => s.components[c].multiplier(|kx, _, _| ik(kx)),
            1 => s.components[c].multiplier(|_, ky, _| ik(ky)),
            _ => s.components[c].multiplier(|_, _, kz| ik(kz)),
        }
    };
    // Components: [xx, xy, xz, yy, yz, zz]
    let r0 = d(0, 0).add(&d(1, 1))?.add(&d(2, 2))?;
    let r1 = d(1, 0).add(&d(3, 1))?.add(&d(4, 2))?;
    let r2 = d(2, 0).add(&d(4, 1))?.add(&d(5, 2))?;
    VectorField::new([r0, r1, r2])
}

/// Curl of a vector field.
pub fn curl<T: Real>(v: &VectorField<T>) -> Result<VectorField<T>> {
    let d = |c: usize, axis: usize| -> ScalarField<T> {
        match axis {
            0 => v.components[c].multiplier(|kx, _, _| ik(kx)),
            1 => v.components[c].multiplier(|_, ky, _| ik(ky)),
            _ => v.components[c].multiplier(|_, _, kz| ik(kz)),
        }
    };
    let c0 = d(2, 1).sub(&d(1, 2))?;
    let c1 = d(0, 2).sub(&d(2, 0))?;
    let c2 = d(1, 0).sub(&d(0, 1))?;
    VectorField::new([c0, c1, c2])
}

/// Laplacian of a scalar field.
pub fn laplacian<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    f.multiplier(|kx, ky, kz| {
        let k2 = (kx * kx + ky * ky + kz * kz) as f64;
        Complex::new(T::from_f64(-k2).unwrap(), T::zero())
    })
}

/// Laplacian applied to every component of a vector field.
pub fn laplacian_vec<T: Real>(v: &VectorField<T>) -> VectorField<T> {
    VectorField {
        components: [
            laplacian(&v.components[0]),
            laplacian(&v.components[1]),
            laplacian(&v.components[2]),
        ],
    }
}

/// Remove the `k = 0` mode: `P_{!=0} f = f - mean(f)`.
pub fn project_nonzero<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    f.multiplier(|kx, ky, kz| {
        if kx == 0 && ky == 0 && kz == 0 {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::one(), T::zero())
        }
    })
}

/// `P_{!=0}` on each component.
pub fn project_nonzero_vec<T: Real>(v: &VectorField<T>) -> VectorField<T> {
    VectorField {
        components: std::array::from_fn(|i| project_nonzero(&v.components[i])),
    }
}

/// Sharp Fourier cutoff: keep modes with `|k| >= kappa` (Euclidean).
pub fn project_high_pass<T: Real>(f: &ScalarField<T>, kappa: f64) -> ScalarField<T> {
    f.multiplier(|kx, ky, kz| {
        let k2 = (kx * kx + ky * ky + kz * kz) as f64;
        if k2.sqrt() >= kappa {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// Inverse Laplacian of a zero-mean field; the result is zero-mean.
pub fn inv_laplacian<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    let scale = f.coeff_linf().to_f64();
    let mean = f.mean().to_f64().abs();
    if scale > 0.0 && mean > 1e-12 * scale {
        return Err(CoreError::NonZeroMean { mean, tol: 1e-12 * scale });
    }
    Ok(f.multiplier(|kx, ky, kz| {
        let k2 = (kx * kx + ky * ky + kz * kz) as f64;
        if k2 == 0.0 {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::from_f64(-1.0 / k2).unwrap(), T::zero())
        }
    }))
}

fn inv_laplacian_unchecked<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    f.multiplier(|kx, ky, kz| {
        let k2 = (kx * kx + ky * ky + kz * kz) as f64;
        if k2 == 0.0 {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::from_f64(-1.0 / k2).unwrap(), T::zero())
        }
    })
}

/// Leray/Helmholtz projection `P_H v = v - grad(inv_laplacian(div v))`;
/// divergence-free output, mean preserved.
pub fn helmholtz<T: Real>(v: &VectorField<T>) -> Result<VectorField<T>> {
    let d = div(v)?;
    let potential = inv_laplacian_unchecked(&project_nonzero(&d));
    let correction = grad(&potential);
    v.sub(&correction)
}

/// `|grad|^{-1} f`: spectral multiplier `1/|k|` on nonzero modes.
///
/// Requires zero mean (within round-off of the field's size).
pub fn inv_gradient_norm<T: Real>(f: &ScalarField<T>) -> Result<ScalarField<T>> {
    let scale = f.coeff_linf().to_f64();
    let mean = f.mean().to_f64().abs();
    if scale > 0.0 && mean > 1e-10 * scale {
        return Err(CoreError::NonZeroMean { mean, tol: 1e-10 * scale });
    }
    Ok(f.multiplier(|kx, ky, kz| {
        let k2 = (kx * kx + ky * ky + kz * kz) as f64;
        if k2 == 0.0 {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::from_f64(1.0 / k2.sqrt()).unwrap(), T::zero())
        }
    }))
}

/// Inverse-divergence (Reynolds) operator.
///
/// With `u = inv_laplacian(v - mean v)`:
/// `R v = 1/4 (grad P_H u + (grad P_H u)^T) + 3/4 (grad u + (grad u)^T)
///        - 1/2 (div u) Id`.
/// The output is symmetric and traceless pointwise and satisfies
/// `div (R v) = v - mean(v)` exactly in exact arithmetic.
pub fn reynolds<T: Real>(v: &VectorField<T>) -> Result<SymTensorField<T>> {
    let v0 = project_nonzero_vec(v);
    let u = VectorField {
        components: [
            inv_laplacian_unchecked(&v0.components[0]),
            inv_laplacian_unchecked(&v0.components[1]),
            inv_laplacian_unchecked(&v0.components[2]),
        ],
    };
    let ph_u = helmholtz(&u)?;
    let half = T::from_f64(0.5).unwrap();
    let quarter = T::from_f64(0.25).unwrap();
    let three_quarter = T::from_f64(0.75).unwrap();

    // Symmetrized gradient entries: sym(grad w)_{ij} = (d_i w_j + d_j w_i)/2.
    let sym_grad = |w: &VectorField<T>| -> Result<[ScalarField<T>; 6]> {
        let d = |c: usize, axis: usize| -> ScalarField<T> {
            match axis {
                0 => w.components[c].multiplier(|kx, _, _| ik(kx)),
                1 => w.components[c].multiplier(|_, ky, _| ik(ky)),
                _ => w.components[c].multiplier(|_, _, kz| ik(kz)),
            }
        };
        Ok([
            d(0, 0),
            d(1, 0).add(&d(0, 1))?.scale(half),
            d(2, 0).add(&d(0, 2))?.scale(half),
            d(1, 1),
            d(2, 1).add(&d(1, 2))?.scale(half),
            d(2, 2),
        ])
    };

    let sp = sym_grad(&ph_u)?;
    let su = sym_grad(&u)?;
    let div_u = div(&u)?;
    // sym_grad already averages the two transposes, so
    // 1/4 (A + A^T) = 1/2 sym(A) and 3/4 (B + B^T) = 3/2 sym(B).
    let mut assembled: [ScalarField<T>; 6] = std::array::from_fn(|i| {
        sp[i]
            .scale(quarter + quarter)
            .add(&su[i].scale(three_quarter + three_quarter))
            .unwrap()
    });
    let half_div = div_u.scale(half);
    assembled[0] = assembled[0].sub(&half_div)?;
    assembled[3] = assembled[3].sub(&half_div)?;
    assembled[5] = assembled[5].sub(&half_div)?;
    SymTensorField::from_components(assembled)
}

/// Pressure recovery: the zero-mean solution of
/// `-laplacian p = div div (v (x) v)`.
pub fn pressure_from_velocity<T: Real>(v: &VectorField<T>) -> Result<ScalarField<T>> {
    // Dealiased tensor square keeps the retained band alias-free.
    let mut comps: [ScalarField<T>; 6] = std::array::from_fn(|_| ScalarField::zeros(*v.grid()));
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    for (slot, (i, j)) in pairs.iter().enumerate() {
        comps[slot] = v.components[*i].dealiased_mul(&v.components[*j])?;
    }
    let s = SymTensorField::from_components(comps)?;
    let dd = div(&div_tensor(&s)?)?;
    // -lap p = dd  =>  p_hat = dd_hat / |k|^2 on nonzero modes.
    Ok(dd.multiplier(|kx, ky, kz| {
        let k2 = (kx * kx + ky * ky + kz * kz) as f64;
        if k2 == 0.0 {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(T::from_f64(1.0 / k2).unwrap(), T::zero())
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{lp_norm, random_vector};
    use crate::grid::Grid;

    fn grid() -> Grid {
        Grid::spatial(16).unwrap()
    }

    fn sin_x1(g: Grid) -> ScalarField<f64> {
        let vals: Vec<f64> = (0..g.len())
            .map(|i| {
                let ix = i / (g.n * g.n);
                g.coord(ix).sin()
            })
            .collect();
        ScalarField::from_values(g, &vals)
    }

    #[test]
    fn laplacian_of_sine() {
        let g = grid();
        let f = sin_x1(g);
        let lf = laplacian(&f);
        let diff = lf.add(&f).unwrap();
        assert!(diff.coeff_linf() < 1e-13);
    }

    #[test]
    fn grad_of_constant_vanishes() {
        let g = grid();
        let f = ScalarField::constant(g, 3.25f64);
        let gf = grad(&f);
        assert!(gf.linf() < 1e-14);
    }

    #[test]
    fn div_curl_is_zero() {
        let g = grid();
        let v = random_vector::<f64>(g, 5, 7);
        let d = div(&curl(&v).unwrap()).unwrap();
        let rel = d.coeff_linf() / v.components[0].coeff_linf().max(1e-300);
        assert!(rel < 1e-12, "rel = {rel:e}");
    }

    #[test]
    fn helmholtz_annihilates_gradients_and_fixes_divfree() {
        let g = grid();
        let f = project_nonzero(&sin_x1(g));
        let gradf = grad(&f);
        let p = helmholtz(&gradf).unwrap();
        assert!(p.linf() < 1e-12);

        let v = random_vector::<f64>(g, 5, 11);
        let vdf = helmholtz(&v).unwrap();
        let twice = helmholtz(&vdf).unwrap();
        let d = twice.sub(&vdf).unwrap();
        assert!(d.linf() < 1e-13 * (1.0 + vdf.linf()));
    }

    #[test]
    fn inv_laplacian_inverts() {
        let g = grid();
        let f = project_nonzero(&sin_x1(g));
        let u = inv_laplacian(&f).unwrap();
        let back = laplacian(&u);
        let d = back.sub(&f).unwrap();
        assert!(d.coeff_linf() < 1e-13);
        assert!(inv_laplacian(&ScalarField::constant(g, 1.0)).is_err());
    }

    #[test]
    fn reynolds_right_inverse_of_divergence() {
        let g = grid();
        let v = random_vector::<f64>(g, 5, 13);
        let r = reynolds(&v).unwrap();
        assert!(r.is_traceless(1e-11));
        let dr = div_tensor(&r).unwrap();
        let expect = project_nonzero_vec(&v);
        let d = dr.sub(&expect).unwrap();
        let rel = d.linf() / v.linf();
        assert!(rel < 1e-10, "rel = {rel:e}");
    }

    #[test]
    fn reynolds_of_zero_and_constant() {
        let g = grid();
        let z = VectorField::zeros(g);
        assert!(reynolds(&z).unwrap().frobenius_linf() < 1e-15);
        let c = VectorField {
            components: [
                ScalarField::constant(g, 1.0),
                ScalarField::constant(g, -2.0),
                ScalarField::constant(g, 0.5),
            ],
        };
        assert!(reynolds(&c).unwrap().frobenius_linf() < 1e-14);
    }

    #[test]
    fn pressure_of_shear_flow_vanishes() {
        let g = grid();
        // v = (f(x3), 0, 0): div div (v (x) v) = 0.
        let vals: Vec<f64> = (0..g.len())
            .map(|i| {
                let iz = i % g.n;
                g.coord(iz).sin()
            })
            .collect();
        let v = VectorField::new([
            ScalarField::from_values(g, &vals),
            ScalarField::zeros(g),
            ScalarField::zeros(g),
        ])
        .unwrap();
        let p = pressure_from_velocity(&v).unwrap();
        assert!(lp_norm(&p, f64::INFINITY).unwrap() < 1e-12);
    }

    #[test]
    fn pressure_solves_poisson() {
        let g = grid();
        let v = random_vector::<f64>(g, 4, 17);
        let p = pressure_from_velocity(&v).unwrap();
        assert!((p.mean()).abs() < 1e-14);
        let mut comps: [ScalarField<f64>; 6] = std::array::from_fn(|_| ScalarField::zeros(g));
        let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        for (slot, (i, j)) in pairs.iter().enumerate() {
            comps[slot] = v.components[*i].dealiased_mul(&v.components[*j]).unwrap();
        }
        let s = SymTensorField::from_components(comps).unwrap();
        let dd = div(&div_tensor(&s).unwrap()).unwrap();
        let lap_p = laplacian(&p);
        let resid = lap_p.add(&dd).unwrap();
        let rel = resid.coeff_linf() / dd.coeff_linf().max(1e-300);
        assert!(rel < 1e-10, "rel = {rel:e}");
    }
}
