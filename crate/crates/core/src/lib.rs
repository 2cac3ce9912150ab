//! Pseudo-spectral toolkit for one step of an intermittent-jet
//! convex-integration scheme for the Navier-Stokes-Reynolds system on the
//! 3-torus `T^3 = [0, 2*pi)^3`.
//!
//! The crate is organised around six subsystems:
//!
//! * [`params`] — the scalar parameter schedule of the scheme and the
//!   constraint checker that certifies (or reports the margins of) every
//!   inequality the construction imposes.
//! * [`field`] — periodic pseudo-spectral calculus: derivatives, Leray
//!   projection, the inverse-divergence (Reynolds) operator, norms,
//!   pressure recovery, and the appendix-style product/decorrelation checks.
//! * [`geometry`] — the finite rational direction set with per-direction
//!   orthonormal triads and the coefficient functionals that reconstruct
//!   symmetric matrices near the identity.
//! * [`jets`] — intermittent jets, their potentials and correctors, exact
//!   identity checks and `L^p` scaling-law measurements.
//! * [`iterate`] — one full convex-integration step: mollification, time
//!   cutoffs, amplitudes, perturbation, new Reynolds stress, diagnostics.
//! * binary/CSV/JSON serialization of fields and reports (in the
//!   respective modules).
//!
//! All numerical kernels are generic over the scalar type through
//! [`scalar::Real`]; `f64` aliases are exported at the crate root.

pub mod chi;
pub mod cutoff;
pub mod energy;
pub mod error;
pub mod field;
pub mod fft;
pub mod geometry;
pub mod grid;
pub mod iterate;
pub mod jets;
pub mod params;
pub mod profiles;
pub mod report;
pub mod scalar;
pub mod timeseries;

pub use error::CoreError;
pub use scalar::Real;

/// Default scalar type used by the CLI and the acceptance suite.
pub type Scalar = f64;
/// Scalar field on `T^3` over `f64`.
pub type ScalarField64 = field::ScalarField<f64>;
/// Vector field on `T^3` over `f64`.
pub type VectorField64 = field::VectorField<f64>;
/// Symmetric 3x3 tensor field on `T^3` over `f64`.
pub type SymTensorField64 = field::SymTensorField<f64>;
/// Level schedule over `f64`.
pub type LevelSchedule64 = params::LevelSchedule<f64>;
/// Parameter configuration over `f64`.
pub type ParameterConfig64 = params::ParameterConfig<f64>;
