//! Polytrope majorant `ρ̃(r)` for the resonant density `ρ*`, its
//! one-dimensional `α` form and the envelope `ρ̃ ≤ C r^{2s-2} (E0 - U)^{n-1/2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate_adaptive, integrate_singular_with, QuadratureRule, SingularEnds};
use crate::potential::RadialPotential;
use crate::scalar::Real;
use crate::steady_state::SteadyState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytropeBoundConfig<T> {
    n: T,
    c: T,
    s: T,
    r_samples: Vec<T>,
}

impl<T: Real> PolytropeBoundConfig<T> {
    pub fn new(n: T, c: T, s: T, r_samples: Vec<T>) -> Result<Self> {
        if !(n > T::zero() && n < T::lit(3.5)) {
            return Err(Error::InvalidParameter(format!("polytrope exponent must lie in (0, 7/2), got {n}")));
        }
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        let s_max = n.min(T::one());
        if !(s > T::zero() && s < s_max) {
            return Err(Error::InvalidParameter(format!("s must lie in (0, {s_max}), got {s}")));
        }
        Ok(Self { n, c, s, r_samples })
    }

    pub fn n(&self) -> T {
        self.n
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn r_samples(&self) -> &[T] {
        &self.r_samples
    }

    pub fn with_samples(&self, r_samples: Vec<T>) -> Self {
        Self {
            r_samples,
            ..self.clone()
        }
    }
}

/// `count` radii in `(0, R0)`: geometric toward both ends, where the
/// envelope ratio is least constrained.
pub fn default_r_samples<T: Real>(r0: T, count: usize) -> Vec<T> {
    let count = count.max(2);
    let half = count / 2;
    let mut out = Vec::with_capacity(count);
    // r = R0 · 10^{-3 + 3i/half}·0.5 toward 0, then R0(1 - 0.5·10^{-3i/…}) toward R0.
    for i in 0..half {
        let x = T::lit(-3.0) + T::lit(3.0) * T::from_usize_lossy(i) / T::from_usize_lossy(half);
        out.push(r0 * T::lit(0.5) * T::lit(10.0).powf(x));
    }
    let rest = count - half;
    for i in 0..rest {
        let x = T::lit(-3.0) * T::from_usize_lossy(i) / T::from_usize_lossy(rest.max(2) - 1);
        out.push(r0 * (T::one() - T::lit(0.5) * T::lit(10.0).powf(x)));
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out.dedup();
    out
}

fn check_radius<T: Real>(ss: &SteadyState<T>, r: T) -> Option<(T, T)> {
    if !(r > T::zero()) || r >= ss.r0() {
        log::warn!("radius {r} outside the support (0, {}): majorant set to 0", ss.r0());
        return None;
    }
    let depth = ss.e0() - ss.value(r);
    (depth > T::zero()).then_some((r, depth))
}

fn adaptive_tol<T: Real>() -> T {
    T::epsilon().sqrt() * T::lit(1e-5)
}

/// `ρ̃(r) = (4π/r²) ∫∫ (E0 - E)^{n-1} L / [((E0 - E) + c L²) sqrt(2(E - U) - L²/r²)] dL dE`
/// by nested quadrature: `L = L_top sin χ` removes the edge singularity,
/// the energy range is split with power grading at the cutoff and a
/// square-root substitution at `E = U(r)`.
pub fn rho_tilde_direct<T: Real>(ss: &SteadyState<T>, cfg: &PolytropeBoundConfig<T>, r: T) -> Result<T> {
    let Some((r, depth)) = check_radius(ss, r) else {
        return Ok(T::zero());
    };
    let n = cfg.n;
    let c = cfg.c;
    let two = T::lit(2.0);
    let tol = adaptive_tol::<T>();
    // x = E0 - E.
    let in_x = |x: T| -> T {
        let l_top = r * (two * (depth - x)).max(T::zero()).sqrt();
        let b = c * l_top * l_top;
        let inner = integrate_adaptive(
            |chi: T| {
                let sn = chi.sin();
                sn / (x + b * sn * sn)
            },
            T::zero(),
            T::FRAC_PI_2(),
            T::zero(),
            tol,
            200,
        )
        .map(|a| a.value)
        .unwrap_or(T::nan());
        x.powf(n - T::one()) * l_top * inner
    };
    let half = depth * T::lit(0.5);
    // x = half · u^m: x^{n-1} log x becomes smooth enough for Gauss–Kronrod.
    let m = (T::lit(2.0) / n).ceil().max(T::one());
    let near_cutoff = integrate_adaptive(
        |u: T| {
            if u == T::zero() {
                return T::zero();
            }
            let um1 = u.powf(m - T::one());
            in_x(half * u * um1) * half * m * um1
        },
        T::zero(),
        T::one(),
        T::zero(),
        tol,
        200,
    )?
    .value;
    let rule = QuadratureRule::gauss_legendre(64);
    let near_bottom = integrate_singular_with(&rule, in_x, half, depth, SingularEnds::Right)?;
    Ok(T::four_pi() / r * (near_cutoff + near_bottom))
}

/// `asinh(√α)/sqrt(α(1 + α))`, which is `artanh(sqrt(α/(α+1)))/sqrt(α(1+α))`.
fn artanh_kernel<T: Real>(alpha: T) -> T {
    if alpha < T::lit(1e-8) {
        return T::one() - alpha * T::lit(2.0) / T::lit(3.0);
    }
    alpha.sqrt().asinh() / (alpha * (T::one() + alpha)).sqrt()
}

/// `∫₀^∞ g(α) dα` over `x = ln α` with adaptive Gauss–Kronrod on a window
/// around `ln centre` wide enough for the algebraic tails.
fn integrate_alpha<T: Real>(g: impl Fn(T) -> T, centre: T, decay: T) -> Result<T> {
    let lc = centre.ln();
    let lo = lc - T::lit(80.0);
    let hi = lc + T::lit(80.0) / decay.min(T::one());
    Ok(integrate_adaptive(
        |x: T| {
            let a = x.exp();
            g(a) * a
        },
        lo,
        hi,
        T::zero(),
        adaptive_tol::<T>(),
        400,
    )?
    .value)
}

/// The same majorant through the substitution `α = 2cr²(E - U)/(E0 - E)`:
/// `(4π√2 (E0 - U)^{n-1/2} / (2cr²)) ∫₀^∞ (β/(β+α))ⁿ (α/(β+α))^{1/2} K(α) dα`
/// with `β = 2cr²` and `K(α) = artanh(sqrt(α/(α+1)))/sqrt(α(1+α))`.
pub fn rho_tilde_alpha<T: Real>(ss: &SteadyState<T>, cfg: &PolytropeBoundConfig<T>, r: T) -> Result<T> {
    let Some((r, depth)) = check_radius(ss, r) else {
        return Ok(T::zero());
    };
    let n = cfg.n;
    let beta = T::lit(2.0) * cfg.c * r * r;
    let integral = integrate_alpha(
        |a| {
            let q = beta + a;
            (beta / q).powf(n) * (a / q).sqrt() * artanh_kernel(a)
        },
        beta,
        n,
    )?;
    Ok(bound_constant::<T>() * depth.powf(n - T::lit(0.5)) / beta * integral)
}

/// `C = 4π√2`.
pub fn bound_constant<T: Real>() -> T {
    T::four_pi() * T::lit(2.0).sqrt()
}

/// `C ∫₀^∞ K(α)/αⁿ dα`, finite for `0 < n < 1`: the `r`-independent bound
/// on `ρ̃(r) (2cr²)^{1-n} / (E0 - U)^{n-1/2}`.
pub fn bound_form_constant<T: Real>(n: T) -> Result<T> {
    if !(n > T::zero() && n < T::one()) {
        return Err(Error::InvalidParameter(format!("bound form needs 0 < n < 1, got {n}")));
    }
    let i = integrate_alpha(|a| artanh_kernel(a) / a.powf(n), T::one(), n)?;
    Ok(bound_constant::<T>() * i)
}

/// `ρ̃(r) (2cr²)^{1-n} / (E0 - U(r))^{n-1/2}`.
pub fn bound_form<T: Real>(ss: &SteadyState<T>, cfg: &PolytropeBoundConfig<T>, r: T) -> Result<T> {
    let Some((r, depth)) = check_radius(ss, r) else {
        return Ok(T::zero());
    };
    let beta = T::lit(2.0) * cfg.c * r * r;
    Ok(rho_tilde_alpha(ss, cfg, r)? * beta.powf(T::one() - cfg.n) / depth.powf(cfg.n - T::lit(0.5)))
}

/// `r^{2s-2} (E0 - U(r))^{n-1/2}`.
pub fn envelope<T: Real>(ss: &SteadyState<T>, cfg: &PolytropeBoundConfig<T>, r: T) -> T {
    let depth = (ss.e0() - ss.value(r)).max(T::zero());
    r.powf(T::lit(2.0) * cfg.s - T::lit(2.0)) * depth.powf(cfg.n - T::lit(0.5))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSample<T> {
    pub r: T,
    pub rho_tilde: T,
    pub envelope: T,
    pub ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport<T> {
    pub samples: Vec<EnvelopeSample<T>>,
    /// `max ρ̃/envelope` on the configured radii.
    pub c_best: T,
    /// The same on radii refined toward `0` and `R0`.
    pub c_best_refined: T,
    pub pass: bool,
    /// `4π ∫₀^{R0} C_best · envelope(r) r dr`: the bound on `‖ρ*/r‖_{L¹}`.
    pub integral: T,
    pub integrable: bool,
}

/// Samples plus midpoints of the intervals in the first and last quarter
/// of the sorted radii.
fn refine_near_ends<T: Real>(samples: &[T]) -> Vec<T> {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let q = (s.len() / 4).max(1);
    let mut out = s.clone();
    for i in 0..s.len().saturating_sub(1) {
        if i < q || i + 1 + q >= s.len() {
            out.push((s[i] + s[i + 1]) * T::lit(0.5));
        }
    }
    if let Some(&first) = s.first() {
        out.push(first * T::lit(0.5));
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out
}

pub fn envelope_check<T: Real>(ss: &SteadyState<T>, cfg: &PolytropeBoundConfig<T>) -> Result<EnvelopeReport<T>> {
    let eval = |r: T| -> Result<EnvelopeSample<T>> {
        let rho = rho_tilde_alpha(ss, cfg, r)?;
        let env = envelope(ss, cfg, r);
        Ok(EnvelopeSample {
            r,
            rho_tilde: rho,
            envelope: env,
            ratio: if env > T::zero() { rho / env } else { T::zero() },
        })
    };
    let samples: Vec<EnvelopeSample<T>> = cfg.r_samples.iter().map(|&r| eval(r)).collect::<Result<_>>()?;
    let c_best = samples.iter().map(|s| s.ratio).fold(T::zero(), T::max);
    let refined: Vec<T> = refine_near_ends(&cfg.r_samples);
    let c_best_refined = refined
        .iter()
        .map(|&r| eval(r).map(|s| s.ratio))
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .fold(T::zero(), T::max);
    let pass = c_best.is_finite()
        && c_best > T::zero()
        && (c_best_refined - c_best).abs() <= T::lit(0.1) * c_best;

    // ∫ 4π r² · C r^{2s-2} D^{n-1/2} / r dr with r = R0 u^m, adaptively:
    // a divergent integral exhausts the interval budget.
    let m = (T::one() / cfg.s).ceil().max(T::one());
    let r0 = ss.r0();
    let integrand = |u: T| {
        let um1 = u.powf(m - T::one());
        let r = r0 * u * um1;
        T::four_pi() * r * c_best * envelope(ss, cfg, r) * r0 * m * um1
    };
    let total = integrate_adaptive(integrand, T::zero(), T::one(), T::zero(), adaptive_tol(), 400)?;
    let integrable = total.converged && total.value.is_finite();
    let b = total.value;
    Ok(EnvelopeReport {
        samples,
        c_best,
        c_best_refined,
        pass,
        integral: b,
        integrable,
    })
}
