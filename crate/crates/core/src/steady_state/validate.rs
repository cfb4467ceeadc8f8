use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::quadrature::{integrate_adaptive, QuadratureRule};
use crate::potential::RadialPotential;
use crate::scalar::Real;
use crate::steady_state::df::{energy_integral, SpeedWeight};
use crate::steady_state::solve::SteadyState;

/// Outcome of the structural checks on a solved state. Violations are
/// listed, not raised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport<T> {
    pub dphi_negative: bool,
    pub potential_increasing: bool,
    /// `r² U'(r)`, the enclosed mass, nondecreasing: subharmonicity of `U`.
    pub enclosed_mass_nondecreasing: bool,
    pub density_nonincreasing: bool,
    /// `(4π)² ∫∫ |φ'| r² sqrt(2(E - U))₊ dE dr` by nested quadrature.
    pub abs_dphi_phase_space: T,
    /// `4π ∫ ρ_{|φ'|}(r) r² dr` on the tabulated grid.
    pub abs_dphi_density: T,
    pub relative_gap: T,
    pub integrable: bool,
    pub violations: Vec<String>,
}

/// Relative agreement demanded of the two `∫|φ'|` routes before the state
/// is called integrable.
pub const INTEGRAL_AGREEMENT: f64 = 1e-6;

pub fn validate_assumptions<T: Real>(ss: &SteadyState<T>) -> Result<ValidationReport<T>> {
    let mut violations = Vec::new();
    let df = ss.df();
    let depth_c = ss.y_central();

    let mut dphi_negative = true;
    for k in 1..512 {
        let d = depth_c * T::from_usize_lossy(k) / T::lit(512.0);
        let v = df.dphi_of_depth(d);
        if !(v < T::zero()) {
            dphi_negative = false;
            violations.push(format!("φ' not strictly negative at E = {}", ss.e0() - d));
            break;
        }
    }

    let r = ss.radii();
    let u = ss.potential_table();
    let du = ss.force_table();
    let rho = ss.density_table();
    // Monotonicity is judged up to the ODE tolerance of the tabulated data.
    let slack = T::epsilon().sqrt() * T::lit(0.1);
    let mut potential_increasing = true;
    let mut enclosed_mass_nondecreasing = true;
    let mut density_nonincreasing = true;
    for i in 1..r.len() {
        if !(u[i] > u[i - 1]) {
            potential_increasing = false;
            violations.push(format!("U not increasing at r = {}", r[i]));
            break;
        }
    }
    for i in 1..r.len() {
        let a = r[i - 1] * r[i - 1] * du[i - 1];
        let b = r[i] * r[i] * du[i];
        if b < a - slack * a.abs().max(b.abs()) {
            enclosed_mass_nondecreasing = false;
            violations.push(format!("r² U'(r) decreasing at r = {}", r[i]));
            break;
        }
    }
    for i in 1..r.len() {
        if rho[i] > rho[i - 1] * (T::one() + slack) {
            density_nonincreasing = false;
            violations.push(format!("ρ0 increasing at r = {}", r[i]));
            break;
        }
    }

    let a = abs_dphi_phase_space(ss)?;
    let b = abs_dphi_density(ss)?;
    let gap = (a - b).abs() / a.abs().max(b.abs()).max(T::min_positive_value());
    let integrable = a.is_finite() && b.is_finite() && gap <= T::lit(INTEGRAL_AGREEMENT).max(T::epsilon().sqrt());
    if !integrable {
        violations.push(format!("∫|φ'| not confirmed finite: {a} vs {b}"));
    }
    Ok(ValidationReport {
        dphi_negative,
        potential_increasing,
        enclosed_mass_nondecreasing,
        density_nonincreasing,
        abs_dphi_phase_space: a,
        abs_dphi_density: b,
        relative_gap: gap,
        integrable,
        violations,
    })
}

/// `(4π)² ∫₀^{R0} r² ∫_{U(r)}^{E0} |φ'(E)| sqrt(2(E - U(r))) dE dr`, outer
/// integral adaptive in `r`, inner with endpoint substitutions.
pub fn abs_dphi_phase_space<T: Real>(ss: &SteadyState<T>) -> Result<T> {
    let rule = QuadratureRule::gauss_legendre(48);
    let df = ss.df();
    let e0 = ss.e0();
    let q = df.cutoff_exponent() - T::one();
    let inner = |r: T| -> T {
        let ur = ss.value(r);
        energy_integral(&rule, ur, e0, SpeedWeight::Speed, q, |_, d| df.dphi_of_depth(d).abs())
            .map(|v| v * r * r)
            .unwrap_or(T::nan())
    };
    let tol = T::epsilon().sqrt() * T::lit(1e-4);
    let res = integrate_adaptive(inner, T::zero(), ss.r0(), T::zero(), tol, 400)?;
    Ok(res.value * T::four_pi() * T::four_pi())
}

/// `4π ∫₀^{R0} ρ_{|φ'|}(r) r² dr`, with `ρ_{|φ'|}` in closed form for
/// polytropes, integrated panel by panel over the tabulated radial grid.
pub fn abs_dphi_density<T: Real>(ss: &SteadyState<T>) -> Result<T> {
    let rule = QuadratureRule::gauss_legendre(8);
    let inner_rule = QuadratureRule::gauss_legendre(48);
    let df = ss.df();
    let r = ss.radii();
    let mut acc = T::zero();
    for w in r.windows(2) {
        for (x, wt) in rule.mapped(w[0], w[1]) {
            let y = ss.depth(x);
            acc = acc + wt * x * x * df.abs_dphi_density(y, &inner_rule)?;
        }
    }
    Ok(acc * T::four_pi())
}
