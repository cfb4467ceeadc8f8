//! Radial oscillations of spherical self-gravitating equilibria.
//!
//! The pipeline runs in five stages:
//!
//! * [`steady_state`] solves for an isotropic equilibrium `φ(E)` with an
//!   optional external potential and checks its structural assumptions.
//! * [`orbits`] covers bound orbits in any [`potential::RadialPotential`]:
//!   turning points, radial period, angle chart and Fourier coefficients.
//! * [`response`] builds the frequency map and `ω*`, the essential bands,
//!   the trace bound on the number of gap eigenvalues and the Galerkin
//!   Birman–Schwinger matrix, and locates the modes.
//! * [`bounds`] provides the polytrope majorant `ρ̃` and its envelope.
//! * [`numerics`] holds the quadrature, roots, ODE and dense linear
//!   algebra used by all of the above.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix `f64`.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod numerics;
pub mod orbits;
pub mod potential;
pub mod response;
pub mod scalar;
pub mod steady_state;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SteadyState = steady_state::SteadyState<f64>;
pub type DistributionFunction = steady_state::DistributionFunction<f64>;
pub type ExternalPotential = potential::ExternalPotential<f64>;
pub type Orbit = orbits::Orbit<f64>;
pub type FrequencyMap = response::FrequencyMap<f64>;
pub type PotentialDensityBasis = response::PotentialDensityBasis<f64>;
pub type SpectralReport = response::SpectralReport<f64>;
pub type Matrix = numerics::Matrix<f64>;

pub type SteadyStateF32 = steady_state::SteadyState<f32>;
pub type DistributionFunctionF32 = steady_state::DistributionFunction<f32>;
