use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::quadrature::{
    integrate_adaptive, integrate_graded, integrate_singular_with, GradedEnd, QuadratureRule, SingularEnds,
};
use crate::orbits::{orbit_time_integral, turning_points};
use crate::potential::RadialPotential;
use crate::response::frequency::{phase_nodes, FrequencyMap, FrequencyModel, MapDomain, PhaseNode};
use crate::scalar::Real;
use crate::steady_state::df::{energy_integral, grading_power, SpeedWeight};
use crate::steady_state::SteadyState;

/// `ω² / (ω² - ω*²)`; infinite when `ω ≤ ω*`.
fn resonance<T: Real>(omega: T, omega_star: T) -> T {
    let w2 = omega * omega;
    let d = w2 - omega_star * omega_star;
    if d > T::zero() {
        w2 / d
    } else {
        T::infinity()
    }
}

/// Relative change between two quadrature orders above which a value is
/// reported as not converged.
pub const REFINEMENT_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoStar<T> {
    pub value: T,
    pub coarse: T,
    /// `false` when the two orders disagree by more than `1e-3`: possibly
    /// divergent.
    pub converged: bool,
}

/// `ρ*(r) = ∫ |φ'(E)| ω²/(ω² - ω*²) d³v`, as the `(E, L)` integral
/// `(4π/r) ∫ dE |φ'| L_top ∫₀^{π/2} sin χ ω²/(ω² - ω*²)|_{L = L_top sin χ} dχ`
/// with `L_top = r sqrt(2(E - U(r)))`, evaluated at two orders.
pub fn rho_star<T: Real>(
    ss: &SteadyState<T>,
    model: &dyn FrequencyModel<T>,
    omega_star: T,
    r: T,
    order: usize,
) -> Result<RhoStar<T>> {
    let coarse = rho_star_order(ss, model, omega_star, r, order)?;
    let value = rho_star_order(ss, model, omega_star, r, 2 * order)?;
    let converged = value.is_finite() && (value - coarse).abs() <= T::lit(1e-3) * value.abs();
    if !converged {
        log::warn!("rho_star at r = {r}: orders disagree ({coarse} vs {value}), possibly divergent");
    }
    Ok(RhoStar {
        value,
        coarse,
        converged,
    })
}

pub fn rho_star_order<T: Real>(
    ss: &SteadyState<T>,
    model: &dyn FrequencyModel<T>,
    omega_star: T,
    r: T,
    order: usize,
) -> Result<T> {
    if !(r > T::zero()) || r >= ss.r0() {
        return Ok(T::zero());
    }
    let rule = QuadratureRule::gauss_legendre(order);
    let u = ss.value(r);
    let e0 = ss.e0();
    let depth = e0 - u;
    if !(depth > T::zero()) {
        return Ok(T::zero());
    }
    let df = ss.df();
    let two = T::lit(2.0);
    let half_pi = T::FRAC_PI_2();
    let mut err = None;
    let mut inner = |x: T, d: T| -> T {
        let e = u + depth * x;
        let l_top = r * (two * depth * x).sqrt();
        let ang = integrate_graded(
            &rule,
            |chi, _| match model.omega(e, l_top * chi.sin()) {
                Ok(w) => chi.sin() * resonance(w, omega_star),
                Err(e) => {
                    err.get_or_insert(e);
                    T::zero()
                }
            },
            T::zero(),
            half_pi,
            GradedEnd::Left,
            two,
        )
        .unwrap_or(T::nan());
        df.dphi_of_depth(depth * d).abs() * l_top * ang
    };
    let half = T::lit(0.5);
    let left = integrate_singular_with(&rule, |x| inner(x, T::one() - x), T::zero(), half, SingularEnds::Left)?;
    let m = grading_power(df.cutoff_exponent() - T::one()).max(T::lit(3.0));
    let right = integrate_graded(&rule, &mut inner, half, T::one(), GradedEnd::Right, m)?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(T::four_pi() / r * depth * (left + right))
}

/// `‖ρ*/r‖_{L¹}` with the number of oscillating modes it permits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceBound<T> {
    /// `None` when the refinement did not converge: no bound.
    pub value: Option<T>,
    /// Value on the frequency-map nodes.
    pub coarse: T,
    /// Value on nodes of twice the resolution.
    pub refined: T,
    /// `⌈value⌉ - 1`, at least 0.
    pub predicted_max_modes: Option<usize>,
}

impl<T: Real> TraceBound<T> {
    pub fn from_values(coarse: T, refined: T) -> Self {
        let ok = refined.is_finite()
            && coarse.is_finite()
            && (refined - coarse).abs() <= T::lit(REFINEMENT_TOLERANCE) * refined.abs();
        let value = ok.then_some(refined);
        Self {
            value,
            coarse,
            refined,
            predicted_max_modes: value.map(predicted_max_modes),
        }
    }
}

/// `⌈v⌉ - 1` clamped at zero.
pub fn predicted_max_modes<T: Real>(v: T) -> usize {
    let c = v.ceil().to_f64_lossy();
    if c <= 1.0 {
        0
    } else {
        c as usize - 1
    }
}

/// `∫ |φ'|/r · ω²/(ω² - ω*²) dx dv = Σ 8π² L dE dL |φ'| R(ω) 2∫dr/(r v_r)`
/// on the map nodes and on nodes of twice the resolution.
pub fn trace_bound<T: Real>(
    ss: &SteadyState<T>,
    fm: &FrequencyMap<T>,
    model: &dyn FrequencyModel<T>,
    omega_star: T,
) -> Result<TraceBound<T>> {
    let coarse_nodes: Vec<PhaseNode<T>> = fm.nodes.iter().map(|n| n.node).collect();
    let inv_r: Vec<T> = fm.nodes.iter().map(|n| n.inv_r_time).collect();
    let coarse = trace_sum(ss, model, omega_star, &coarse_nodes, &inv_r)?;
    let refined = trace_on_grid(ss, &fm.domain, model, omega_star, 2 * fm.n_e, 2 * fm.n_l)?;
    Ok(TraceBound::from_values(coarse, refined))
}

/// The trace integral on a fresh `n_e × n_l` node set.
pub fn trace_on_grid<T: Real>(
    ss: &SteadyState<T>,
    domain: &MapDomain<T>,
    model: &dyn FrequencyModel<T>,
    omega_star: T,
    n_e: usize,
    n_l: usize,
) -> Result<T> {
    let nodes = phase_nodes(ss, domain, n_e, n_l)?;
    let inv_r: Vec<T> = nodes
        .par_iter()
        .map(|n| orbit_time_integral(ss, n.e, n.l, |r| T::one() / r))
        .collect::<Result<_>>()?;
    trace_sum(ss, model, omega_star, &nodes, &inv_r)
}

fn trace_sum<T: Real>(
    ss: &SteadyState<T>,
    model: &dyn FrequencyModel<T>,
    omega_star: T,
    nodes: &[PhaseNode<T>],
    inv_r: &[T],
) -> Result<T> {
    let eight_pi2 = T::lit(8.0) * T::PI() * T::PI();
    let df = ss.df();
    let terms: Vec<T> = nodes
        .par_iter()
        .zip(inv_r.par_iter())
        .map(|(n, &ir)| -> Result<T> {
            let w = model.omega(n.e, n.l)?;
            Ok(eight_pi2 * n.l * n.area_weight * df.abs_dphi(n.e) * resonance(w, omega_star) * ir)
        })
        .collect::<Result<_>>()?;
    Ok(terms.into_iter().sum())
}

/// The trace integral as `4π ∫₀^{R0} r ρ*(r) dr`, Gauss–Legendre in `r`.
pub fn trace_bound_radial<T: Real>(
    ss: &SteadyState<T>,
    model: &dyn FrequencyModel<T>,
    omega_star: T,
    n_r: usize,
    order: usize,
) -> Result<T> {
    let rule = QuadratureRule::gauss_legendre(n_r);
    let pts: Vec<(T, T)> = rule.mapped(T::zero(), ss.r0()).collect();
    let terms: Vec<T> = pts
        .par_iter()
        .map(|&(r, w)| rho_star_order(ss, model, omega_star, r, order).map(|v| w * r * v))
        .collect::<Result<_>>()?;
    Ok(T::four_pi() * terms.into_iter().sum::<T>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    DivergentTrend,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Convergent => "convergent",
            Verdict::DivergentTrend => "divergent trend",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport<T> {
    pub epsilon: T,
    pub deltas: Vec<T>,
    /// `I_m`, nondecreasing in `m`.
    pub partials: Vec<T>,
    /// Ratios of successive increments `(I_m - I_{m-1})/(I_{m-1} - I_{m-2})`.
    pub ratios: Vec<T>,
    pub verdict: Verdict,
}

/// Minimum number of nodes in a shell `δ_m < ω - ω* ≤ δ_{m-1}` for the
/// shell to count.
const SHELL_NODES: usize = 16;

/// `I_m = ∫_{Ω_ε ∩ {ω - ω* > δ_m}} |φ'|/(ω - ω*) dx dv` for `δ_m = δ_0 2^{-m}`.
///
/// The increments `I_m - I_{m-1}` shrink geometrically for an integrable
/// singularity, stay level for a logarithmic divergence and grow for a
/// power divergence; the verdict reads the mean ratio of the last three.
/// Levels stop once a shell holds fewer than a few nodes of the
/// `n × n` grid.
pub fn divergence_diagnostic<T: Real>(
    ss: &SteadyState<T>,
    domain: &MapDomain<T>,
    model: &dyn FrequencyModel<T>,
    omega_star: T,
    epsilon: T,
    n: usize,
) -> Result<DivergenceReport<T>> {
    let nodes = phase_nodes(ss, domain, n, n)?;
    let df = ss.df();
    let eight_pi2 = T::lit(8.0) * T::PI() * T::PI();
    let two_pi = T::lit(2.0) * T::PI();
    // (ω - ω*, measure · |φ'|) for nodes inside Ω_ε.
    let samples: Vec<Option<(T, T)>> = nodes
        .par_iter()
        .map(|p| -> Result<Option<(T, T)>> {
            let (rm, rp) = turning_points(ss, p.e, p.l)?;
            if !(rp > rm + epsilon) {
                return Ok(None);
            }
            let w = model.omega(p.e, p.l)?;
            let mass = eight_pi2 * p.l * p.area_weight * two_pi / w * df.abs_dphi(p.e);
            Ok(Some((w - omega_star, mass)))
        })
        .collect::<Result<_>>()?;
    let samples: Vec<(T, T)> = samples.into_iter().flatten().collect();
    let x_max = samples.iter().map(|s| s.0).fold(T::zero(), T::max);
    let delta0 = x_max * T::lit(0.25);
    let mut deltas = Vec::new();
    let mut partials = Vec::new();
    for m in 0..60 {
        let d = delta0 * T::lit(2.0).powi(-(m as i32));
        if m > 0 {
            let prev = deltas[m - 1];
            let shell = samples.iter().filter(|s| s.0 > d && s.0 <= prev).count();
            if shell < SHELL_NODES {
                break;
            }
        }
        let total: T = samples.iter().filter(|s| s.0 > d).map(|s| s.1 / s.0).sum();
        deltas.push(d);
        partials.push(total);
    }
    let inc: Vec<T> = partials.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<T> = inc
        .windows(2)
        .map(|w| if w[0] > T::zero() { w[1] / w[0] } else { T::infinity() })
        .collect();
    let verdict = if ratios.len() < 3 {
        Verdict::Inconclusive
    } else {
        let last = &ratios[ratios.len() - 3..];
        let g = (last.iter().map(|r| r.max(T::min_positive_value()).ln()).sum::<T>() / T::lit(3.0)).exp();
        if g < T::lit(0.75) {
            Verdict::Convergent
        } else if g > T::lit(0.85) {
            Verdict::DivergentTrend
        } else {
            Verdict::Inconclusive
        }
    };
    Ok(DivergenceReport {
        epsilon,
        deltas,
        partials,
        ratios,
        verdict,
    })
}

/// `Tr K_φ` before and after integration by parts in `v`:
/// `16π² ∫∫ |φ'| v² r dv dr` and `16π² ∫∫ φ r dv dr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KphiTraces<T> {
    pub kernel_form: T,
    pub parts_form: T,
    pub relative_gap: T,
}

pub fn kphi_trace_check<T: Real>(ss: &SteadyState<T>) -> Result<KphiTraces<T>> {
    let rule = QuadratureRule::gauss_legendre(48);
    let df = ss.df();
    let e0 = ss.e0();
    let q = df.cutoff_exponent();
    let tol = T::epsilon().sqrt() * T::lit(1e-4);
    let sixteen_pi2 = T::lit(16.0) * T::PI() * T::PI();
    let kernel = integrate_adaptive(
        |r: T| {
            energy_integral(&rule, ss.value(r), e0, SpeedWeight::Speed, q - T::one(), |_, d| {
                df.dphi_of_depth(d).abs()
            })
            .map(|v| v * r)
            .unwrap_or(T::nan())
        },
        T::zero(),
        ss.r0(),
        T::zero(),
        tol,
        400,
    )?
    .value
        * sixteen_pi2;
    let parts = integrate_adaptive(
        |r: T| {
            energy_integral(&rule, ss.value(r), e0, SpeedWeight::InverseSpeed, q, |_, d| df.phi_of_depth(d))
                .map(|v| v * r)
                .unwrap_or(T::nan())
        },
        T::zero(),
        ss.r0(),
        T::zero(),
        tol,
        400,
    )?
    .value
        * sixteen_pi2;
    Ok(KphiTraces {
        kernel_form: kernel,
        parts_form: parts,
        relative_gap: (kernel - parts).abs() / kernel.abs().max(parts.abs()),
    })
}
