//! Bound orbits in a radial potential: circular orbits, turning points,
//! the radial period `T(E, L)` and the angle chart `θ_r ↔ r`.
//!
//! Everything here takes any [`RadialPotential`], so analytic potentials
//! serve as ground truth for the same code paths used on solved states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::interp::cubic_hermite;
use crate::numerics::quadrature::{integrate_singular_with, QuadratureRule, SingularEnds, DEFAULT_ORDER};
use crate::numerics::roots::find_root_precise;
use crate::potential::RadialPotential;
use crate::scalar::Real;

/// Relative width `(r+ - r-)/r*` below which an orbit is treated as an
/// epicycle with frequency `κ = sqrt(U'' + 3U'/r)`.
pub const NEAR_CIRCULAR: f64 = 1e-6;

/// Default number of `θ` samples over `[0, π]` stored by the chart.
pub const DEFAULT_CHART_SAMPLES: usize = 128;

const CHART_PANELS: usize = 256;
const CHART_PANEL_ORDER: usize = 8;

pub fn effective_potential<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, r: T, l: T) -> T {
    p.value(r) + l * l / (T::lit(2.0) * r * r)
}

/// Epicyclic frequency `sqrt(U'' + 3U'/r)`.
pub fn circular_frequency<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, r: T) -> T {
    (p.second_deriv(r) + T::lit(3.0) * p.deriv(r) / r).sqrt()
}

/// Doubles `hi` from `start` until `f(hi) > 0`.
fn expand_up<T: Real>(mut f: impl FnMut(T) -> T, start: T) -> Option<T> {
    let mut hi = start;
    for _ in 0..400 {
        let v = f(hi);
        if v > T::zero() {
            return Some(hi);
        }
        if !v.is_finite() && !v.is_nan() {
            return None;
        }
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return None;
        }
    }
    None
}

/// Halves `lo` from `start` until `f(lo) > 0`.
fn expand_down<T: Real>(mut f: impl FnMut(T) -> T, start: T) -> Option<T> {
    let mut lo = start;
    for _ in 0..1000 {
        if f(lo) > T::zero() {
            return Some(lo);
        }
        lo = lo * T::lit(0.5);
        if lo == T::zero() {
            return None;
        }
    }
    None
}

/// Circular radius `r*` solving `r³U'(r) = L²` and its energy
/// `E_min(L) = V_eff(r*)`.
pub fn circular_orbit<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, l: T) -> Result<(T, T)> {
    if !(l > T::zero()) {
        return Err(Error::InvalidParameter(format!("angular momentum must be positive, got {l}")));
    }
    let l2 = l * l;
    let g = |r: T| r * r * r * p.deriv(r) - l2;
    let scale = p.length_scale();
    let hi = expand_up(g, scale).ok_or(Error::NoBoundCircularOrbit { l: l.to_f64_lossy() })?;
    let lo = expand_down(|r| -g(r), hi * T::lit(0.5)).ok_or(Error::NoBoundCircularOrbit { l: l.to_f64_lossy() })?;
    let root = find_root_precise(g, lo, hi)?;
    let r_star = root.x;
    let e_min = effective_potential(p, r_star, l);
    if !(e_min < p.escape_value()) {
        return Err(Error::NoBoundCircularOrbit { l: l.to_f64_lossy() });
    }
    Ok((r_star, e_min))
}

/// Time integral `2 ∫ g(r) dr / v_r` over one radial oscillation, so that
/// `(ω/2π)` times it is the orbit average of `g`. Circular orbits return
/// `T·g(r*)`.
pub fn orbit_time_integral<T: Real, P: RadialPotential<T> + ?Sized>(
    p: &P,
    e: T,
    l: T,
    g: impl Fn(T) -> T,
) -> Result<T> {
    let rule = QuadratureRule::gauss_legendre(DEFAULT_ORDER);
    let b = bounds(p, e, l)?;
    if let (true, Some(rs)) = (b.near_circular(), b.r_star) {
        let (t, _) = period_of_bounds(p, e, l, &b, &rule)?;
        return Ok(t * g(rs));
    }
    Ok(T::lit(2.0) * half_time_integral(p, e, l, &b, &rule, g)?)
}

/// Circular orbit at energy `E`: its radius and `L_max(E)`.
pub fn circular_at_energy<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, e: T) -> Result<(T, T)> {
    if !(e > p.central_value() && e < p.escape_value()) {
        return Err(Error::NoBoundOrbits { e: e.to_f64_lossy() });
    }
    let half = T::lit(0.5);
    let g = |r: T| p.value(r) + half * r * p.deriv(r) - e;
    let scale = p.length_scale();
    let hi = expand_up(g, scale).ok_or(Error::NoBoundOrbits { e: e.to_f64_lossy() })?;
    let lo = expand_down(|r| -g(r), hi * half).ok_or(Error::NoBoundOrbits { e: e.to_f64_lossy() })?;
    let r = find_root_precise(g, lo, hi)?.x;
    Ok((r, (r * r * r * p.deriv(r)).max(T::zero()).sqrt()))
}

/// Largest angular momentum at energy `E`: the inverse of `L ↦ E_min(L)`,
/// found through the circular-orbit energy `U + rU'/2`.
pub fn l_max<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, e: T) -> Result<T> {
    circular_at_energy(p, e).map(|(_, l)| l)
}

/// Turning radii `(r-, r+)` of `V_eff(r) = E`; for `L = 0`, `r- = 0`.
pub fn turning_points<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, e: T, l: T) -> Result<(T, T)> {
    if !(e < p.escape_value()) {
        return Err(Error::NoBoundOrbits { e: e.to_f64_lossy() });
    }
    if l < T::zero() {
        return Err(Error::InvalidParameter(format!("angular momentum must be non-negative, got {l}")));
    }
    if l == T::zero() {
        let u0 = p.central_value();
        if !(e > u0) {
            return Err(Error::BelowCircularEnergy {
                e: e.to_f64_lossy(),
                l: 0.0,
                e_min: u0.to_f64_lossy(),
            });
        }
        let f = |r: T| p.value(r) - e;
        let hi = expand_up(f, p.length_scale()).ok_or(Error::NoBoundOrbits { e: e.to_f64_lossy() })?;
        let lo = if u0.is_finite() {
            T::zero()
        } else {
            expand_down(|r| -f(r), hi * T::lit(0.5)).ok_or(Error::NoBoundOrbits { e: e.to_f64_lossy() })?
        };
        let r_plus = find_root_precise(f, lo, hi)?.x;
        return Ok((T::zero(), r_plus));
    }
    let (r_star, e_min) = circular_orbit(p, l)?;
    if !(e > e_min) {
        return Err(Error::BelowCircularEnergy {
            e: e.to_f64_lossy(),
            l: l.to_f64_lossy(),
            e_min: e_min.to_f64_lossy(),
        });
    }
    turning_points_around(p, e, l, r_star)
}

fn turning_points_around<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, e: T, l: T, r_star: T) -> Result<(T, T)> {
    let f = |r: T| effective_potential(p, r, l) - e;
    let lo = expand_down(f, r_star * T::lit(0.5)).ok_or(Error::NoBoundOrbits { e: e.to_f64_lossy() })?;
    let hi = expand_up(f, r_star * T::lit(2.0)).ok_or(Error::NoBoundOrbits { e: e.to_f64_lossy() })?;
    let r_minus = find_root_precise(f, lo, r_star)?.x;
    let r_plus = find_root_precise(f, r_star, hi)?.x;
    Ok((r_minus, r_plus))
}

/// Geometry of a bound orbit before any quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Bounds<T> {
    r_minus: T,
    r_plus: T,
    /// Circular radius, `None` for radial orbits.
    r_star: Option<T>,
}

impl<T: Real> Bounds<T> {
    fn near_circular(&self) -> bool {
        match self.r_star {
            Some(rs) => self.r_plus - self.r_minus < T::lit(NEAR_CIRCULAR) * rs,
            None => false,
        }
    }
}

fn bounds<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, e: T, l: T) -> Result<Bounds<T>> {
    if l == T::zero() {
        let (r_minus, r_plus) = turning_points(p, e, l)?;
        return Ok(Bounds {
            r_minus,
            r_plus,
            r_star: None,
        });
    }
    let (r_star, e_min) = circular_orbit(p, l)?;
    if !(e < p.escape_value()) {
        return Err(Error::NoBoundOrbits { e: e.to_f64_lossy() });
    }
    if e < e_min {
        return Err(Error::BelowCircularEnergy {
            e: e.to_f64_lossy(),
            l: l.to_f64_lossy(),
            e_min: e_min.to_f64_lossy(),
        });
    }
    if e == e_min {
        return Ok(Bounds {
            r_minus: r_star,
            r_plus: r_star,
            r_star: Some(r_star),
        });
    }
    let (r_minus, r_plus) = turning_points_around(p, e, l, r_star)?;
    Ok(Bounds {
        r_minus,
        r_plus,
        r_star: Some(r_star),
    })
}

/// `∫ g(r) dr / sqrt(2(E - V_eff))` between the turning points. The range is
/// split at `r*` and then geometrically, so inverse-square-root ends are
/// removed by substitution and small pericentres stay resolved.
fn half_time_integral<T: Real, P: RadialPotential<T> + ?Sized>(
    p: &P,
    e: T,
    l: T,
    b: &Bounds<T>,
    rule: &QuadratureRule<T>,
    g: impl Fn(T) -> T,
) -> Result<T> {
    let two = T::lit(2.0);
    let f = |r: T| {
        let k = two * (e - effective_potential(p, r, l));
        g(r) / k.max(T::min_positive_value()).sqrt()
    };
    let Some(r_star) = b.r_star else {
        return integrate_singular_with(rule, f, b.r_minus, b.r_plus, SingularEnds::Right);
    };
    let mut acc = integrate_singular_with(rule, f, b.r_minus, r_star, SingularEnds::Left)?;
    let mut a = r_star;
    let split = (b.r_plus + r_star) * T::lit(0.5);
    while a * T::lit(4.0) < split {
        let next = a * T::lit(4.0);
        acc = acc + rule.integrate(f, a, next)?;
        a = next;
    }
    acc = acc + integrate_singular_with(rule, f, a, b.r_plus, SingularEnds::Right)?;
    Ok(acc)
}

/// Radial period `T(E, L)` and frequency `ω_r = 2π/T`.
///
/// For `L = 0` this is the time from the centre to `r+` and back, half the
/// period of the full line orbit. At `E = E_min(L)`, or for orbits narrower
/// than [`NEAR_CIRCULAR`], the epicyclic limit is returned.
pub fn period<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, e: T, l: T) -> Result<(T, T)> {
    let rule = QuadratureRule::gauss_legendre(DEFAULT_ORDER);
    period_with(p, e, l, &rule)
}

pub fn period_with<T: Real, P: RadialPotential<T> + ?Sized>(
    p: &P,
    e: T,
    l: T,
    rule: &QuadratureRule<T>,
) -> Result<(T, T)> {
    let b = bounds(p, e, l)?;
    period_of_bounds(p, e, l, &b, rule)
}

fn period_of_bounds<T: Real, P: RadialPotential<T> + ?Sized>(
    p: &P,
    e: T,
    l: T,
    b: &Bounds<T>,
    rule: &QuadratureRule<T>,
) -> Result<(T, T)> {
    let two_pi = T::lit(2.0) * T::PI();
    if let (true, Some(rs)) = (b.near_circular(), b.r_star) {
        let kappa = circular_frequency(p, rs);
        return Ok((two_pi / kappa, kappa));
    }
    let t = T::lit(2.0) * half_time_integral(p, e, l, b, rule, |_| T::one())?;
    Ok((t, two_pi / t))
}

/// Sampled angle chart along one radial oscillation, parametrised by
/// `u ∈ [0, π/2]` with `r = r- + (r+ - r-) sin²u`; `θ(u=0) = π` at `r-`
/// and `θ(u=π/2) = 0` at `r+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleChart<T> {
    u: Vec<T>,
    theta: Vec<T>,
    dtheta: Vec<T>,
    /// Radii at `θ_j = πj/N`, `j = 0..=N`.
    r_uniform: Vec<T>,
}

/// A bound orbit with its period and angle chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit<T> {
    pub e: T,
    pub l: T,
    pub r_minus: T,
    pub r_plus: T,
    pub period: T,
    pub omega: T,
    pub chart: AngleChart<T>,
}

impl<T: Real> Orbit<T> {
    fn width(&self) -> T {
        self.r_plus - self.r_minus
    }

    fn u_of_r(&self, r: T) -> T {
        let w = self.width();
        if w == T::zero() {
            return T::FRAC_PI_2();
        }
        let x = ((r - self.r_minus) / w).max(T::zero()).min(T::one());
        x.sqrt().asin()
    }

    fn theta_of_u(&self, u: T) -> (T, T) {
        let c = &self.chart;
        let i = crate::numerics::interp::segment_index(&c.u, u);
        let h = c.u[i + 1] - c.u[i];
        cubic_hermite((u - c.u[i]) / h, h, c.theta[i], c.dtheta[i], c.theta[i + 1], c.dtheta[i + 1])
    }

    /// `θ_r(r)` for `r ∈ [r-, r+]`.
    pub fn theta_of_r(&self, r: T) -> T {
        self.theta_of_u(self.u_of_r(r)).0
    }

    /// `r(θ)` for `θ ∈ [0, π]`, the inverse of [`Orbit::theta_of_r`].
    pub fn r_of_theta(&self, theta: T) -> T {
        let u = self.u_of_theta(theta);
        let s = u.sin();
        self.r_minus + self.width() * s * s
    }

    fn u_of_theta(&self, theta: T) -> T {
        let c = &self.chart;
        let theta = theta.max(T::zero()).min(T::PI());
        // θ decreases along the table.
        let n = c.u.len();
        let k = c.theta.partition_point(|&t| t > theta).clamp(1, n - 1);
        let (mut lo, mut hi) = (c.u[k - 1], c.u[k]);
        let mut u = lo + (hi - lo) * T::lit(0.5);
        for _ in 0..100 {
            let (t, dt) = self.theta_of_u(u);
            let g = t - theta;
            if g > T::zero() {
                lo = u;
            } else {
                hi = u;
            }
            let newton = u - g / dt;
            let next = if dt < T::zero() && newton > lo && newton < hi {
                newton
            } else {
                lo + (hi - lo) * T::lit(0.5)
            };
            if (next - u).abs() <= T::epsilon() * T::lit(4.0) * T::one().max(u) {
                u = next;
                break;
            }
            u = next;
        }
        u
    }

    /// Radii at the uniform angles `θ_j = πj/N` stored by the chart.
    pub fn uniform_radii(&self) -> &[T] {
        &self.chart.r_uniform
    }

    /// Fourier cosine coefficients of `f(r(θ))` on `[0, π]`, see
    /// [`fourier_coefficients`].
    pub fn fourier<F: FnMut(T) -> T>(&self, mut f: F, k_max: usize) -> Vec<T> {
        let samples: Vec<T> = self.chart.r_uniform.iter().map(|&r| f(r)).collect();
        fourier_coefficients(&samples, k_max)
    }
}

/// `ĉ_k = (2/π) ∫₀^π F(θ) cos kθ dθ` by the trapezoid rule on uniform
/// samples `F(πj/N)`, `j = 0..=N`; then `F = ĉ_0/2 + Σ ĉ_k cos kθ`.
pub fn fourier_coefficients<T: Real>(samples: &[T], k_max: usize) -> Vec<T> {
    let n = samples.len() - 1;
    let nf = T::from_usize_lossy(n);
    let two_over_n = T::lit(2.0) / nf;
    (0..=k_max)
        .map(|k| {
            let mut acc = T::zero();
            for (j, &s) in samples.iter().enumerate() {
                // cos(πkj/N) via the reduced index keeps the argument small.
                let m = (k * j) % (2 * n);
                let c = (T::PI() * T::from_usize_lossy(m) / nf).cos();
                let w = if j == 0 || j == n { T::lit(0.5) } else { T::one() };
                acc = acc + w * s * c;
            }
            acc * two_over_n
        })
        .collect()
}

/// Builds the orbit `(E, L)` with period and an angle chart holding
/// `samples + 1` uniform-`θ` radii.
pub fn angle_chart<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, e: T, l: T, samples: usize) -> Result<Orbit<T>> {
    let rule = QuadratureRule::gauss_legendre(DEFAULT_ORDER);
    let panel_rule = QuadratureRule::gauss_legendre(CHART_PANEL_ORDER);
    angle_chart_with(p, e, l, samples, &rule, &panel_rule)
}

pub(crate) fn angle_chart_with<T: Real, P: RadialPotential<T> + ?Sized>(
    p: &P,
    e: T,
    l: T,
    samples: usize,
    rule: &QuadratureRule<T>,
    panel_rule: &QuadratureRule<T>,
) -> Result<Orbit<T>> {
    let samples = samples.max(2);
    let b = bounds(p, e, l)?;
    let (period, omega) = period_of_bounds(p, e, l, &b, rule)?;
    let w = b.r_plus - b.r_minus;
    let m = CHART_PANELS;
    let half_pi = T::FRAC_PI_2();
    let mf = T::from_usize_lossy(m);
    let mut u = Vec::with_capacity(m + 1);
    let mut theta = Vec::with_capacity(m + 1);
    let mut dtheta = Vec::with_capacity(m + 1);
    if b.near_circular() {
        // Epicycle: r = r* - (w/2) cos 2u, θ = π - 2u.
        for k in 0..=m {
            let uk = half_pi * T::from_usize_lossy(k) / mf;
            u.push(uk);
            theta.push(T::PI() - T::lit(2.0) * uk);
            dtheta.push(-T::lit(2.0));
        }
    } else {
        let two = T::lit(2.0);
        // dt/du along the orbit.
        let g = |uu: T| {
            let (s, c) = uu.sin_cos();
            let r = b.r_minus + w * s * s;
            let k = two * (e - effective_potential(p, r, l));
            two * w * s * c / k.max(T::min_positive_value()).sqrt()
        };
        let mut t_cum = Vec::with_capacity(m + 1);
        let mut g_nodes = Vec::with_capacity(m + 1);
        let mut acc = T::zero();
        for k in 0..=m {
            let uk = half_pi * T::from_usize_lossy(k) / mf;
            if k > 0 {
                acc = acc + panel_rule.integrate(g, u[k - 1], uk)?;
            }
            u.push(uk);
            t_cum.push(acc);
            g_nodes.push(g(uk));
        }
        // Endpoints: g has a finite limit there; the formula above gives
        // 0·∞ at r±, so take the limit from the neighbouring panel.
        g_nodes[0] = endpoint_limit(&g, T::zero(), half_pi / mf, b.r_star.is_none());
        g_nodes[m] = endpoint_limit(&g, half_pi, -half_pi / mf, false);
        let scale = T::PI() / acc;
        for k in 0..=m {
            theta.push(T::PI() - scale * t_cum[k]);
            dtheta.push(-scale * g_nodes[k]);
        }
        theta[m] = T::zero();
    }
    let mut orbit = Orbit {
        e,
        l,
        r_minus: b.r_minus,
        r_plus: b.r_plus,
        period,
        omega,
        chart: AngleChart {
            u,
            theta,
            dtheta,
            r_uniform: vec![],
        },
    };
    let nf = T::from_usize_lossy(samples);
    orbit.chart.r_uniform = (0..=samples)
        .map(|j| {
            if j == 0 {
                orbit.r_plus
            } else if j == samples {
                orbit.r_minus
            } else {
                orbit.r_of_theta(T::PI() * T::from_usize_lossy(j) / nf)
            }
        })
        .collect();
    Ok(orbit)
}

/// Limit of `g` at `x0` from samples at `x0 + h`, `x0 + 2h` (linear
/// extrapolation); exact zero for radial orbits at the centre.
fn endpoint_limit<T: Real>(g: &impl Fn(T) -> T, x0: T, h: T, zero: bool) -> T {
    if zero {
        return T::zero();
    }
    let eps = h * T::lit(1e-3);
    let a = g(x0 + eps);
    let b = g(x0 + eps * T::lit(2.0));
    T::lit(2.0) * a - b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ExternalPotential;
    use std::f64::consts::PI;

    fn kepler() -> ExternalPotential<f64> {
        ExternalPotential::kepler(1.0).unwrap()
    }

    #[test]
    fn kepler_circular_and_l_max() {
        let k = kepler();
        for l in [0.3, 1.0, 2.0] {
            let (rs, em) = circular_orbit(&k, l).unwrap();
            assert!((rs - l * l).abs() < 1e-12 * rs);
            assert!((em + 0.5 / (l * l)).abs() < 1e-12);
        }
        for e in [-2.0, -0.5, -0.1] {
            let lm = l_max(&k, e).unwrap();
            assert!((lm - 1.0 / (-2.0 * e).sqrt()).abs() < 1e-12 * lm);
        }
        assert!(matches!(l_max(&k, 0.1), Err(Error::NoBoundOrbits { .. })));
    }

    #[test]
    fn kepler_turning_points_and_period() {
        let k = kepler();
        let (rm, rp) = turning_points(&k, -0.5, 0.8).unwrap();
        assert!((rm - 0.4).abs() < 1e-12 && (rp - 1.6).abs() < 1e-12);
        for l in [0.05, 0.3, 0.6, 0.9, 0.99] {
            let (t, _) = period(&k, -0.5, l).unwrap();
            assert!((t - 2.0 * PI).abs() < 1e-10 * t, "L={l} T={t}");
        }
        assert!(matches!(turning_points(&k, -0.5, 1.2), Err(Error::BelowCircularEnergy { .. })));
    }

    #[test]
    fn harmonic_chart_matches_ellipse() {
        let w0 = 1.3f64;
        let h = ExternalPotential::harmonic(w0, 10.0).unwrap();
        let e = -8.0;
        let l = 1.5;
        let orbit = angle_chart(&h, e, l, 64).unwrap();
        assert!((orbit.omega - 2.0 * w0).abs() < 1e-10, "{}", orbit.omega);
        // Energy measured from the bottom of the well.
        let a = (e + 10.0) / (w0 * w0);
        let b = (a * a - l * l / (w0 * w0)).sqrt();
        for j in 0..=50 {
            let th = PI * j as f64 / 50.0;
            let r = orbit.r_of_theta(th);
            assert!((r * r - (a + b * th.cos())).abs() < 1e-9, "θ={th}");
        }
        assert!(orbit.theta_of_r(orbit.r_plus).abs() < 1e-14);
        assert!((orbit.theta_of_r(orbit.r_minus) - PI).abs() < 1e-14);
    }

    #[test]
    fn fourier_of_constant_and_cosine() {
        let k = kepler();
        let orbit = angle_chart(&k, -0.5, 0.7, 128).unwrap();
        let c = orbit.fourier(|_| 1.0, 4);
        assert!((c[0] - 2.0).abs() < 1e-14);
        assert!(c[1..].iter().all(|x| x.abs() < 1e-14));
        let c = orbit.fourier(|r| orbit.theta_of_r(r).cos(), 5);
        assert!((c[1] - 1.0).abs() < 1e-10, "{c:?}");
        for (k, x) in c.iter().enumerate() {
            if k != 1 {
                assert!(x.abs() < 1e-10, "k={k} {x}");
            }
        }
    }

    #[test]
    fn near_circular_limit() {
        let p = ExternalPotential::plummer(1.0, 1.0).unwrap();
        let l = 0.4;
        let (rs, em) = circular_orbit(&p, l).unwrap();
        let kappa = circular_frequency(&p, rs);
        let (_, w): (f64, f64) = period(&p, em + 1e-6, l).unwrap();
        assert!((w - kappa).abs() < 1e-4 * kappa);
        let (_, w0) = period(&p, em, l).unwrap();
        assert_eq!(w0, kappa);
    }
}
