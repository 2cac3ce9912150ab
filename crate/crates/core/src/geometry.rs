//! The finite rational direction set with per-direction orthonormal triads,
//! the periodization integer `n_*`, and the coefficient functions
//! `gamma_xi` that reconstruct symmetric matrices near the identity:
//! `R = sum_xi gamma_xi^2(R) xi (x) xi` on `|R - Id|_F <= 1/2`.
//!
//! Triads are carried as exact rationals; the reconstruction functionals are
//! solved exactly and then lowered to the working scalar for evaluation.

use crate::error::{CoreError, Result};
use crate::scalar::Real;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

type RatVec = [BigRational; 3];

fn dot(a: &RatVec, b: &RatVec) -> BigRational {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

fn cross(a: &RatVec, b: &RatVec) -> RatVec {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn to_f64_vec(v: &RatVec) -> [f64; 3] {
    std::array::from_fn(|i| ratio_to_f64(&v[i]))
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    // Entries stay tiny (denominators are products of 5s), so this is exact.
    let nf: f64 = n.to_string().parse().unwrap();
    let df: f64 = d.to_string().parse().unwrap();
    nf / df
}

/// Symmetric 3x3 matrix packed as `[xx, xy, xz, yy, yz, zz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat3<T>(pub [T; 6]);

impl<T: Real> SymMat3<T> {
    pub fn identity() -> Self {
        SymMat3([T::one(), T::zero(), T::zero(), T::one(), T::zero(), T::one()])
    }

    pub fn zero() -> Self {
        SymMat3([T::zero(); 6])
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> T {
        self.0[crate::field::sym_index(i, j)]
    }

    /// Frobenius norm (off-diagonal entries counted twice).
    pub fn frobenius(&self) -> T {
        let two = T::one() + T::one();
        let s = self.0[0] * self.0[0]
            + self.0[3] * self.0[3]
            + self.0[5] * self.0[5]
            + two * (self.0[1] * self.0[1] + self.0[2] * self.0[2] + self.0[4] * self.0[4]);
        s.sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        SymMat3(std::array::from_fn(|i| self.0[i] - other.0[i]))
    }

    pub fn add(&self, other: &Self) -> Self {
        SymMat3(std::array::from_fn(|i| self.0[i] + other.0[i]))
    }

    pub fn scale(&self, f: T) -> Self {
        SymMat3(std::array::from_fn(|i| self.0[i] * f))
    }

    pub fn trace(&self) -> T {
        self.0[0] + self.0[3] + self.0[5]
    }
}

/// One direction of the set with its exact orthonormal triad.
#[derive(Debug, Clone)]
pub struct Direction {
    pub xi: RatVec,
    pub a_xi: RatVec,
    pub cross: RatVec,
    pub xi_f64: [f64; 3],
    pub a_xi_f64: [f64; 3],
    pub cross_f64: [f64; 3],
}

impl Direction {
    fn new(xi: RatVec, a_xi: RatVec) -> Result<Self> {
        let one = BigRational::one();
        let zero = BigRational::zero();
        if dot(&xi, &xi) != one || dot(&a_xi, &a_xi) != one {
            return Err(CoreError::Construction(
                "triad vectors must be exact unit vectors".into(),
            ));
        }
        if dot(&xi, &a_xi) != zero {
            return Err(CoreError::Construction("xi and A_xi must be orthogonal".into()));
        }
        let c = cross(&xi, &a_xi);
        if dot(&c, &c) != one {
            return Err(CoreError::Construction("xi x A_xi must be a unit vector".into()));
        }
        let xi_f64 = to_f64_vec(&xi);
        let a_xi_f64 = to_f64_vec(&a_xi);
        let cross_f64 = to_f64_vec(&c);
        Ok(Direction {
            xi,
            a_xi,
            cross: c,
            xi_f64,
            a_xi_f64,
            cross_f64,
        })
    }
}

fn serialize_rat_vec<S: Serializer>(v: &RatVec, s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[String; 2]> = v
        .iter()
        .map(|r| [r.numer().to_string(), r.denom().to_string()])
        .collect();
    pairs.serialize(s)
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            #[serde(serialize_with = "serialize_rat_vec")]
            xi: &'a RatVec,
            #[serde(serialize_with = "serialize_rat_vec")]
            a_xi: &'a RatVec,
            #[serde(serialize_with = "serialize_rat_vec")]
            cross: &'a RatVec,
        }
        Repr {
            xi: &self.xi,
            a_xi: &self.a_xi,
            cross: &self.cross,
        }
        .serialize(s)
    }
}

/// The direction set with the lowered reconstruction functionals.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    pub directions: Vec<Direction>,
    /// l.c.m. of the denominators of every triad entry.
    pub n_star: u32,
    /// Gram matrix `<xi_i (x) xi_i, xi_j (x) xi_j> = (xi_i . xi_j)^2`.
    pub gram: [[f64; 6]; 6],
    /// Row `i` gives the linear functional of the packed symmetric matrix
    /// that returns the coordinate `c_i(R)`; `gamma_i = sqrt(c_i)`.
    pub functionals: [[f64; 6]; 6],
    /// Coordinates of the identity (exact solve, lowered).
    pub id_coordinates: [f64; 6],
    /// Measured `sup_xi |gamma_xi|_{C0}` over the admissible ball.
    pub sup_gamma_c0: f64,
    /// Measured minimum coordinate over the ball sample.
    pub min_coordinate: f64,
}

impl Serialize for DirectionSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DirectionSet", 6)?;
        st.serialize_field("directions", &self.directions)?;
        st.serialize_field("n_star", &self.n_star)?;
        st.serialize_field("gram", &self.gram)?;
        st.serialize_field("id_coordinates", &self.id_coordinates)?;
        st.serialize_field("sup_gamma_c0", &self.sup_gamma_c0)?;
        st.serialize_field("min_coordinate", &self.min_coordinate)?;
        st.end()
    }
}

/// Packed moment vector of `xi (x) xi`: pairing weights against a packed
/// symmetric matrix, i.e. `<R, xi (x) xi> = sum_k m_k R_k`.
fn moment_weights(xi: &RatVec) -> [BigRational; 6] {
    let two = rat(2, 1);
    [
        &xi[0] * &xi[0],
        &two * &xi[0] * &xi[1],
        &two * &xi[0] * &xi[2],
        &xi[1] * &xi[1],
        &two * &xi[1] * &xi[2],
        &xi[2] * &xi[2],
    ]
}

/// Exact Gauss-Jordan inversion of a 6x6 rational matrix.
fn invert6(m: &[[BigRational; 6]; 6]) -> Result<[[BigRational; 6]; 6]> {
    let mut a = m.clone();
    let mut inv: [[BigRational; 6]; 6] =
        std::array::from_fn(|i| std::array::from_fn(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
    for col in 0..6 {
        let pivot_row = (col..6)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| CoreError::Construction("gram matrix is singular".into()))?;
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = a[col][col].clone();
        for j in 0..6 {
            a[col][j] = &a[col][j] / &pivot;
            inv[col][j] = &inv[col][j] / &pivot;
        }
        for r in 0..6 {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..6 {
                let t = &a[col][j] * &factor;
                a[r][j] = &a[r][j] - &t;
                let t = &inv[col][j] * &factor;
                inv[r][j] = &inv[r][j] - &t;
            }
        }
    }
    Ok(inv)
}

/// The candidate set: six rational directions whose tensor squares form a
/// basis of the symmetric matrices, each with an explicit rational triad.
fn candidate_directions() -> Result<Vec<Direction>> {
    let entries: [([i64; 3], [i64; 3]); 6] = [
        ([3, 4, 0], [4, -3, 0]),
        ([3, -4, 0], [4, 3, 0]),
        ([0, 3, 4], [0, 4, -3]),
        ([0, 3, -4], [0, 4, 3]),
        ([4, 0, 3], [3, 0, -4]),
        ([-4, 0, 3], [3, 0, 4]),
    ];
    entries
        .iter()
        .map(|(x, a)| {
            Direction::new(
                std::array::from_fn(|i| rat(x[i], 5)),
                std::array::from_fn(|i| rat(a[i], 5)),
            )
        })
        .collect()
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Number of ball samples used for the positivity/sup measurements.
pub const BALL_SAMPLES: usize = 10_000;

/// Smallest admissible coordinate over the ball sample; below this the
/// candidate set is rejected.
pub const MIN_COORDINATE: f64 = 1e-3;

/// Deterministic sample of symmetric matrices with `|R - Id|_F <= 1/2`,
/// biased towards the boundary where positivity is tightest.
pub fn ball_sample(count: usize, seed: u64) -> Vec<SymMat3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut e = [0.0f64; 6];
        for v in e.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let m = SymMat3(e);
        let norm = m.frobenius();
        // Alternate interior and boundary points.
        let radius = if i % 2 == 0 {
            0.5 * rng.gen_range(0.0..1.0f64)
        } else {
            0.5
        };
        let scaled = if norm > 0.0 { m.scale(radius / norm) } else { m };
        out.push(SymMat3::identity().add(&scaled));
    }
    out
}

/// Build and verify the direction set.
///
/// Verifications: (i) the gram matrix of `{xi (x) xi}` is nonsingular,
/// (ii) the coordinates of the identity are all strictly positive,
/// (iii) every coordinate stays positive (above [`MIN_COORDINATE`]) on a
/// [`BALL_SAMPLES`]-point sample of the admissible ball. `n_*` is the
/// l.c.m. of the triad denominators. Failure names the offending check;
/// alternative candidate sets can be wired in here if one is ever needed.
pub fn build_direction_set() -> Result<DirectionSet> {
    let directions = candidate_directions()?;

    // n_*: l.c.m. of all denominators (entries are already reduced).
    let mut n_star: u32 = 1;
    for d in &directions {
        for v in [&d.xi, &d.a_xi, &d.cross] {
            for r in v {
                let den: u32 = r
                    .denom()
                    .to_string()
                    .parse()
                    .map_err(|_| CoreError::Construction("denominator out of range".into()))?;
                n_star = lcm_u32(n_star, den);
            }
        }
        // Sanity: n_* times each triad vector must be integral.
        for v in [&d.xi, &d.a_xi, &d.cross] {
            for r in v {
                let scaled = r * BigRational::from_integer(BigInt::from(n_star));
                if !scaled.denom().is_one() {
                    return Err(CoreError::Construction(
                        "n_* does not clear the denominators".into(),
                    ));
                }
            }
        }
    }

    // Exact gram matrix and functional matrix.
    let moments: Vec<[BigRational; 6]> = directions.iter().map(|d| moment_weights(&d.xi)).collect();
    let gram_exact: [[BigRational; 6]; 6] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let d = dot(&directions[i].xi, &directions[j].xi);
            &d * &d
        })
    });
    let gram_inv = invert6(&gram_exact).map_err(|_| {
        CoreError::Construction("gram nonsingularity check failed: {xi (x) xi} is not a basis".into())
    })?;

    // functionals[i][k] = sum_j gram_inv[i][j] * moments[j][k]:
    // c_i(R) = functionals[i] . packed(R).
    let functionals_exact: [[BigRational; 6]; 6] = std::array::from_fn(|i| {
        std::array::from_fn(|k| {
            let mut acc = BigRational::zero();
            for j in 0..6 {
                acc += &gram_inv[i][j] * &moments[j][k];
            }
            acc
        })
    });

    // Identity coordinates: c_i(Id) exactly, all strictly positive.
    let id_packed = [rat(1, 1), rat(0, 1), rat(0, 1), rat(1, 1), rat(0, 1), rat(1, 1)];
    let mut id_coordinates = [0.0f64; 6];
    for i in 0..6 {
        let mut acc = BigRational::zero();
        for k in 0..6 {
            acc += &functionals_exact[i][k] * &id_packed[k];
        }
        if !acc.is_positive() {
            return Err(CoreError::Construction(format!(
                "identity-coordinate positivity check failed at direction {i}"
            )));
        }
        id_coordinates[i] = ratio_to_f64(&acc);
    }

    let gram: [[f64; 6]; 6] =
        std::array::from_fn(|i| std::array::from_fn(|j| ratio_to_f64(&gram_exact[i][j])));
    let functionals: [[f64; 6]; 6] =
        std::array::from_fn(|i| std::array::from_fn(|k| ratio_to_f64(&functionals_exact[i][k])));

    let mut set = DirectionSet {
        directions,
        n_star,
        gram,
        functionals,
        id_coordinates,
        sup_gamma_c0: 0.0,
        min_coordinate: f64::INFINITY,
    };

    // gamma real (coordinates positive) on the ball sample.
    let mut sup = 0.0f64;
    let mut min_c = f64::INFINITY;
    for r in ball_sample(BALL_SAMPLES, 0x9e3779b97f4a7c15) {
        let coords = set.coordinates(&r)?;
        for c in coords {
            if c < min_c {
                min_c = c;
            }
            let g = c.max(0.0).sqrt();
            if g > sup {
                sup = g;
            }
        }
    }
    if min_c <= MIN_COORDINATE {
        return Err(CoreError::Construction(format!(
            "gamma positivity check failed: min coordinate {min_c:e} <= {MIN_COORDINATE:e}"
        )));
    }
    set.sup_gamma_c0 = sup;
    set.min_coordinate = min_c;
    Ok(set)
}

impl DirectionSet {
    /// Coordinates `c_i(R)` of a symmetric matrix in the `{xi (x) xi}`
    /// basis (linear in `R`). Domain: `|R - Id|_F <= 1/2`.
    pub fn coordinates<T: Real>(&self, r: &SymMat3<T>) -> Result<[T; 6]> {
        let dist = r.sub(&SymMat3::identity()).frobenius().to_f64();
        if dist > 0.5 + 1e-12 {
            return Err(CoreError::OutsideBall(dist));
        }
        Ok(std::array::from_fn(|i| {
            let mut acc = T::zero();
            for k in 0..6 {
                acc += T::from_f64(self.functionals[i][k]).unwrap() * r.0[k];
            }
            acc
        }))
    }

    /// `gamma_xi(R) = sqrt(c_xi(R))`, strictly positive on the ball.
    pub fn gamma<T: Real>(&self, index: usize, r: &SymMat3<T>) -> Result<T> {
        let c = self.coordinates(r)?[index];
        if c < T::zero() {
            return Err(CoreError::InvariantViolation(format!(
                "negative coordinate {c:e} for direction {index} inside the ball"
            )));
        }
        Ok(c.sqrt())
    }

    /// All six `gamma_xi(R)` at once (hot path of the amplitude assembly).
    pub fn gamma_all<T: Real>(&self, r: &SymMat3<T>) -> Result<[T; 6]> {
        let coords = self.coordinates(r)?;
        let mut out = [T::zero(); 6];
        for (i, c) in coords.into_iter().enumerate() {
            if c < T::zero() {
                return Err(CoreError::InvariantViolation(format!(
                    "negative coordinate {c:e} for direction {i} inside the ball"
                )));
            }
            out[i] = c.sqrt();
        }
        Ok(out)
    }

    /// Reconstruction residual `|sum gamma^2 xi(x)xi - R|_F`.
    pub fn reconstruction_error<T: Real>(&self, r: &SymMat3<T>) -> Result<T> {
        let coords = self.coordinates(r)?;
        let mut acc = SymMat3::<T>::zero();
        for (i, d) in self.directions.iter().enumerate() {
            let xi: [T; 3] = std::array::from_fn(|k| T::from_f64(d.xi_f64[k]).unwrap());
            let outer = SymMat3([
                xi[0] * xi[0],
                xi[0] * xi[1],
                xi[0] * xi[2],
                xi[1] * xi[1],
                xi[1] * xi[2],
                xi[2] * xi[2],
            ]);
            acc = acc.add(&outer.scale(coords[i]));
        }
        Ok(acc.sub(r).frobenius())
    }

    /// Measured constants feeding the energy-pinning formula.
    pub fn measure_constants(&self) -> crate::params::GeometryConstants {
        crate::params::GeometryConstants {
            sup_gamma_c0: self.sup_gamma_c0,
            cardinality: self.directions.len() as u32,
            c0: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_and_n_star_is_five() {
        let set = build_direction_set().unwrap();
        assert_eq!(set.directions.len(), 6);
        // All triads here have denominators 1 or 5.
        assert_eq!(set.n_star, 5);
    }

    #[test]
    fn triads_exactly_orthonormal() {
        let set = build_direction_set().unwrap();
        for d in &set.directions {
            assert_eq!(dot(&d.xi, &d.xi), BigRational::one());
            assert_eq!(dot(&d.a_xi, &d.a_xi), BigRational::one());
            assert_eq!(dot(&d.cross, &d.cross), BigRational::one());
            assert_eq!(dot(&d.xi, &d.a_xi), BigRational::zero());
            assert_eq!(dot(&d.xi, &d.cross), BigRational::zero());
            assert_eq!(dot(&d.a_xi, &d.cross), BigRational::zero());
        }
    }

    #[test]
    fn identity_coordinates_are_half() {
        let set = build_direction_set().unwrap();
        for c in set.id_coordinates {
            assert!((c - 0.5).abs() < 1e-15);
        }
        // gamma_xi(Id) = 1/sqrt(2).
        let id = SymMat3::<f64>::identity();
        for i in 0..6 {
            let g = set.gamma(i, &id).unwrap();
            assert!((g - 0.5f64.sqrt()).abs() < 1e-13);
        }
    }

    #[test]
    fn reconstruction_identity_on_ball() {
        let set = build_direction_set().unwrap();
        for r in ball_sample(500, 7) {
            let err = set.reconstruction_error(&r).unwrap();
            assert!(err < 1e-13, "reconstruction error {err:e}");
        }
    }

    #[test]
    fn coordinates_affine_in_perturbation() {
        let set = build_direction_set().unwrap();
        let e = SymMat3([0.1, 0.02, -0.03, -0.05, 0.01, 0.04]);
        let c0 = set.coordinates(&SymMat3::<f64>::identity()).unwrap();
        let c1 = set
            .coordinates(&SymMat3::identity().add(&e.scale(0.5)))
            .unwrap();
        let c2 = set.coordinates(&SymMat3::identity().add(&e)).unwrap();
        for i in 0..6 {
            // c(Id + t E) is affine in t: midpoint property.
            let mid = 0.5 * (c0[i] + c2[i]);
            assert!((c1[i] - mid).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_outside_ball() {
        let set = build_direction_set().unwrap();
        let far = SymMat3::identity().add(&SymMat3([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert!(matches!(
            set.coordinates(&far),
            Err(CoreError::OutsideBall(_))
        ));
    }

    #[test]
    fn n_star_clears_denominators() {
        let set = build_direction_set().unwrap();
        let ns = BigRational::from_integer(BigInt::from(set.n_star));
        for d in &set.directions {
            for v in [&d.xi, &d.a_xi, &d.cross] {
                for r in v {
                    assert!((r * &ns).denom().is_one());
                }
            }
        }
    }

    #[test]
    fn sup_gamma_dominates_id_value() {
        let set = build_direction_set().unwrap();
        assert!(set.sup_gamma_c0 >= 0.5f64.sqrt() - 1e-12);
        assert!(set.min_coordinate > MIN_COORDINATE);
    }

    #[test]
    fn serializes_exact_rationals() {
        let set = build_direction_set().unwrap();
        let json = serde_json::to_value(&set).unwrap();
        let first = &json["directions"][0]["xi"];
        assert_eq!(first[0][0], "3");
        assert_eq!(first[0][1], "5");
    }
}
