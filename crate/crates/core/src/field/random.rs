//! Seeded band-limited random fields for the verification suites.
//!
//! Coefficients are drawn in `f64` in a fixed mode order, so a given seed
//! produces bit-identical fields for every scalar type and thread count.

use super::{ScalarField, SymTensorField, VectorField};
use crate::grid::Grid;
use crate::scalar::Real;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random real scalar field with modes `0 < |k| <= kmax` (Euclidean).
pub fn random_scalar<T: Real>(grid: Grid, kmax: i64, seed: u64) -> ScalarField<T> {
    random_scalar_rng(grid, kmax, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_scalar_rng<T: Real>(
    grid: Grid,
    kmax: i64,
    rng: &mut ChaCha8Rng,
) -> ScalarField<T> {
    let n = grid.n;
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    let wrap = |k: i64| (((k % n as i64) + n as i64) % n as i64) as usize;
    for kx in -kmax..=kmax {
        for ky in -kmax..=kmax {
            for kz in -kmax..=kmax {
                if kx * kx + ky * ky + kz * kz > kmax * kmax {
                    continue;
                }
                if (kx, ky, kz) == (0, 0, 0) {
                    continue;
                }
                // Fill each conjugate pair once, from its lexicographically
                // positive representative.
                if (kx, ky, kz) < (-kx, -ky, -kz) {
                    continue;
                }
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                let c = Complex::new(T::from_f64(re).unwrap(), T::from_f64(im).unwrap());
                coeffs[(wrap(kx) * n + wrap(ky)) * n + wrap(kz)] = c;
                coeffs[(wrap(-kx) * n + wrap(-ky)) * n + wrap(-kz)] = c.conj();
            }
        }
    }
    ScalarField::from_coeffs(grid, coeffs)
}

/// Random real vector field with band `|k| <= kmax`.
pub fn random_vector<T: Real>(grid: Grid, kmax: i64, seed: u64) -> VectorField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VectorField {
        components: [
            random_scalar_rng(grid, kmax, &mut rng),
            random_scalar_rng(grid, kmax, &mut rng),
            random_scalar_rng(grid, kmax, &mut rng),
        ],
    }
}

/// Random divergence-free vector field (Leray projection of a random field).
pub fn random_divergence_free<T: Real>(grid: Grid, kmax: i64, seed: u64) -> VectorField<T> {
    super::ops::helmholtz(&random_vector(grid, kmax, seed)).expect("same grid")
}

/// Random symmetric tensor field; `traceless` subtracts the trace part.
pub fn random_sym_tensor<T: Real>(
    grid: Grid,
    kmax: i64,
    seed: u64,
    traceless: bool,
) -> SymTensorField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = SymTensorField {
        components: std::array::from_fn(|_| random_scalar_rng(grid, kmax, &mut rng)),
    };
    if traceless {
        s.traceless_part().expect("same grid")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_across_calls() {
        let g = Grid::spatial(16).unwrap();
        let a = random_scalar::<f64>(g, 4, 42);
        let b = random_scalar::<f64>(g, 4, 42);
        assert_eq!(a.coeffs(), b.coeffs());
        let c = random_scalar::<f64>(g, 4, 43);
        assert!(a.coeffs() != c.coeffs());
    }

    #[test]
    fn band_limited_and_real() {
        let g = Grid::spatial(16).unwrap();
        let f = random_scalar::<f64>(g, 3, 1);
        assert!(f.hermitian_error() < 1e-15);
        assert_eq!(f.coeff(4, 0, 0).norm(), 0.0);
        assert!(f.coeff(1, 1, 1).norm() > 0.0);
        assert_eq!(f.mean(), 0.0);
    }
}
