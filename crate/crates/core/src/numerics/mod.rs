//! Quadrature, root finding, ODE integration, interpolation and dense
//! linear algebra shared by the physics modules.

pub mod interp;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod roots;

pub use linalg::{cholesky, sym_eig, Matrix, SymEig};
pub use ode::{integrate_radial_ode, OdeConfig, RadialTrajectory};
pub use quadrature::{
    integrate_adaptive, integrate_graded, integrate_singular, integrate_singular_with, Adaptive, GradedEnd,
    QuadratureRule, SingularEnds, DEFAULT_ORDER,
};
pub use roots::{find_root, find_root_precise, golden_section_min, RootResult};
