//! Equilibria `(φ, U, ρ0, E0, R0, M)` of the gravitational Vlasov–Poisson
//! system with isotropic `φ(E)` and an optional external potential.

pub mod df;
mod solve;
mod validate;

use std::fmt::Write as _;

pub use df::{energy_integral, polytrope_constant, DfKind, DistributionFunction, SpeedWeight};
pub use solve::{solve_equilibrium, SolveConfig, StateHeader, SteadyState, DEFAULT_GRID_NODES};
pub use validate::{abs_dphi_density, abs_dphi_phase_space, validate_assumptions, ValidationReport};

use crate::scalar::Real;

/// Tabulated state as CSV with columns `r,U,dU,rho0`, full precision.
pub fn state_csv<T: Real>(ss: &SteadyState<T>) -> String {
    let mut out = String::from("r,U,dU,rho0\n");
    for i in 0..ss.radii().len() {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            ss.radii()[i],
            ss.potential_table()[i],
            ss.force_table()[i],
            ss.density_table()[i]
        );
    }
    out
}
