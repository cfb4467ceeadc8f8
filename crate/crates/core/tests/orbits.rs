use std::f64::consts::PI;
use std::time::Instant;

use antonov_core::orbits::{angle_chart, circular_orbit, effective_potential, l_max, period, turning_points};
use antonov_core::potential::RadialPotential;
use antonov_core::steady_state::{solve_equilibrium, SolveConfig};
use antonov_core::{DistributionFunction, Error, ExternalPotential, SteadyState};
use proptest::prelude::*;

fn kepler_period(e: f64) -> f64 {
    2.0 * PI * (-2.0 * e).powf(-1.5)
}

fn polytrope_state() -> SteadyState {
    let df = DistributionFunction::polytrope(1.0, 1.0, 0.0).unwrap();
    solve_equilibrium(&df, None, 1.0, &SolveConfig::default()).unwrap()
}

#[test]
fn kepler_period_is_third_law() {
    let k = ExternalPotential::kepler(1.0).unwrap();
    let start = Instant::now();
    for e in [-2.0f64, -1.0, -0.5, -0.2, -0.05] {
        let lm = 1.0 / (-2.0 * e).sqrt();
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let (tp, w) = period(&k, e, t * lm).unwrap();
            let exact = kepler_period(e);
            assert!((tp - exact).abs() < 1e-8 * exact, "E = {e}, t = {t}: {tp} vs {exact}");
            assert!((w - 2.0 * PI / exact).abs() < 1e-8 * w);
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn kepler_circular_orbits_and_turning_points() {
    let k = ExternalPotential::kepler(1.0).unwrap();
    for l in [0.3, 1.0, 2.5] {
        let (r, e) = circular_orbit(&k, l).unwrap();
        assert!((r - l * l).abs() < 1e-12 * r);
        assert!((e + 0.5 / (l * l)).abs() < 1e-12 * e.abs());
    }
    for e in [-1.0f64, -0.3] {
        assert!((l_max(&k, e).unwrap() - 1.0 / (-2.0 * e).sqrt()).abs() < 1e-12);
    }
    let (rm, rp) = turning_points(&k, -0.5, 0.8).unwrap();
    assert!((rm - 0.4).abs() < 1e-12 && (rp - 1.6).abs() < 1e-12);
    assert!(matches!(turning_points(&k, -0.6, 1.0), Err(Error::BelowCircularEnergy { .. })));
}

#[test]
fn isochrone_period_is_independent_of_l() {
    let iso = ExternalPotential::isochrone(1.0, 1.0).unwrap();
    let start = Instant::now();
    for e in [-0.45, -0.3, -0.1] {
        let lm = l_max(&iso, e).unwrap();
        let ts: Vec<f64> = [0.0, 0.2, 0.4, 0.6, 0.8].iter().map(|t| period(&iso, e, t * lm).unwrap().0).collect();
        let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ts.iter().cloned().fold(0.0, f64::max);
        assert!((hi - lo) / lo < 1e-6, "E = {e}: {ts:?}");
        let exact = kepler_period(e);
        assert!(ts.iter().all(|t| (t - exact).abs() < 1e-8 * exact), "E = {e}: {ts:?}");
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn harmonic_radial_frequency_is_twice_the_oscillator() {
    let w0 = 1.7;
    let h = ExternalPotential::harmonic(w0, 3.0).unwrap();
    for (e, frac) in [(-2.0, 0.0), (-1.0, 0.5), (2.0, 0.9)] {
        let l = frac * l_max(&h, e).unwrap();
        let (_, w) = period(&h, e, l).unwrap();
        assert!((w - 2.0 * w0).abs() < 1e-10, "{w}");
    }
    let (r, _) = circular_orbit(&h, 2.0).unwrap();
    assert!((r - (2.0f64 / w0).sqrt()).abs() < 1e-12);
}

/// `U'' + 3U'/r` by central differences of `U'`.
fn epicyclic_fd<P: RadialPotential<f64>>(p: &P, r: f64) -> f64 {
    let h = 1e-5 * r;
    let upp = (p.deriv(r + h) - p.deriv(r - h)) / (2.0 * h);
    (upp + 3.0 * p.deriv(r) / r).sqrt()
}

fn check_circular_limit<P: RadialPotential<f64>>(p: &P, ls: &[f64]) {
    for &l in ls {
        let (rs, e_min) = circular_orbit(p, l).unwrap();
        let (_, w) = period(p, e_min + 1e-6, l).unwrap();
        let kappa = epicyclic_fd(p, rs);
        assert!((w - kappa).abs() < 1e-4 * kappa, "L = {l}: {w} vs {kappa}");
    }
}

#[test]
fn circular_limit_of_the_frequency() {
    let ss = polytrope_state();
    let lm = l_max(&ss, ss.e0() - 1e-3).unwrap();
    let ls: Vec<f64> = (1..=10).map(|i| lm * i as f64 / 11.0).collect();
    check_circular_limit(&ss, &ls);
    let iso = ExternalPotential::isochrone(1.0, 1.0).unwrap();
    check_circular_limit(&iso, &[0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
}

#[test]
fn circular_energy_and_l_max_are_inverse() {
    let ss = polytrope_state();
    let mut prev = f64::NEG_INFINITY;
    for i in 1..=20 {
        let l = 0.01 * i as f64;
        let (rs, e_min) = circular_orbit(&ss, l).unwrap();
        assert!(e_min > prev);
        prev = e_min;
        if e_min < ss.e0() {
            assert!((l_max(&ss, e_min).unwrap() - l).abs() < 1e-10 * l.max(1.0));
            let (rm, rp) = turning_points(&ss, e_min + 1e-3, l).unwrap();
            assert!(rm < rs && rs < rp);
            assert!((effective_potential(&ss, rm, l) - e_min - 1e-3).abs() < 1e-10);
            assert!((effective_potential(&ss, rp, l) - e_min - 1e-3).abs() < 1e-10);
        }
    }
    assert!(l_max(&ss, ss.u0() + 1e-10).unwrap() < 1e-3);
    assert!(matches!(l_max(&ss, ss.u0() - 0.1), Err(Error::NoBoundOrbits { .. })));
}

#[test]
fn radial_orbit_uses_the_origin_as_inner_turning_point() {
    let ss = polytrope_state();
    let e = 0.5 * (ss.u0() + ss.e0());
    let (rm, rp) = turning_points(&ss, e, 0.0).unwrap();
    assert_eq!(rm, 0.0);
    assert!((ss.value(rp) - e).abs() < 1e-12);
}

#[test]
fn period_is_continuous_across_the_domain() {
    let ss = polytrope_state();
    let e = 0.3 * ss.u0() + 0.7 * ss.e0();
    let lm = l_max(&ss, e).unwrap();
    let sample = |n: usize| -> Vec<f64> { (0..=n).map(|i| period(&ss, e, lm * i as f64 / n as f64 * 0.999).unwrap().0).collect() };
    let coarse = sample(10);
    let fine = sample(20);
    let jump = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    // Adjacent differences shrink with the step.
    assert!(jump(&fine) < 0.75 * jump(&coarse), "{} {}", jump(&fine), jump(&coarse));
    for i in 0..=10 {
        assert_eq!(coarse[i], fine[2 * i]);
    }
}

/// Line-orbit time of flight from `r+` to the origin by RK4 on
/// `x'' = -U'(x)`; a quarter of the line period, so half of `T`.
fn fall_time<P: RadialPotential<f64>>(p: &P, r_plus: f64) -> f64 {
    let acc = |x: f64| -p.deriv(x.abs()) * x.signum();
    let step = |x: f64, v: f64, h: f64| {
        let (k1x, k1v) = (v, acc(x));
        let (k2x, k2v) = (v + 0.5 * h * k1v, acc(x + 0.5 * h * k1x));
        let (k3x, k3v) = (v + 0.5 * h * k2v, acc(x + 0.5 * h * k2x));
        let (k4x, k4v) = (v + h * k3v, acc(x + h * k3x));
        (
            x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        )
    };
    let h = 1e-3;
    let (mut x, mut v, mut t) = (r_plus, 0.0, 0.0);
    loop {
        let (nx, nv) = step(x, v, h);
        if nx <= 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if step(x, v, mid).0 > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return t + 0.5 * (lo + hi);
        }
        x = nx;
        v = nv;
        t += h;
    }
}

#[test]
fn radial_period_is_half_the_line_orbit() {
    let iso = ExternalPotential::isochrone(1.0, 1.0).unwrap();
    for e in [-0.4, -0.2] {
        let (_, rp) = turning_points(&iso, e, 0.0).unwrap();
        let (t, _) = period(&iso, e, 0.0).unwrap();
        let tof = fall_time(&iso, rp);
        assert!((2.0 * tof - t).abs() < 1e-8 * t, "{} vs {t}", 2.0 * tof);
    }
}

#[test]
fn harmonic_chart_matches_closed_form() {
    let h = ExternalPotential::harmonic(1.3, 2.0).unwrap();
    let e = 1.0;
    let l = 0.6 * l_max(&h, e).unwrap();
    let orbit = angle_chart(&h, e, l, 128).unwrap();
    let (a2, b2) = (orbit.r_plus.powi(2), orbit.r_minus.powi(2));
    for j in 0..=50 {
        let theta = PI * j as f64 / 50.0;
        // r² oscillates at the radial frequency with θ = 0 at r+.
        let exact = (0.5 * (a2 + b2) + 0.5 * (a2 - b2) * theta.cos()).sqrt();
        assert!((orbit.r_of_theta(theta) - exact).abs() < 1e-8, "θ = {theta}");
    }
    assert!(orbit.theta_of_r(orbit.r_plus).abs() < 1e-12);
    assert!((orbit.theta_of_r(orbit.r_minus) - PI).abs() < 1e-12);
}

#[test]
fn chart_is_strictly_decreasing() {
    let ss = polytrope_state();
    let e = 0.5 * (ss.u0() + ss.e0());
    for frac in [0.0, 0.4, 0.95] {
        let orbit = angle_chart(&ss, e, frac * l_max(&ss, e).unwrap(), 128).unwrap();
        let th: Vec<f64> = (0..=400)
            .map(|i| orbit.theta_of_r(orbit.r_minus + (orbit.r_plus - orbit.r_minus) * i as f64 / 400.0))
            .collect();
        assert!(th.windows(2).all(|w| w[1] < w[0]), "L fraction {frac}");
    }
}

#[test]
fn fourier_coefficients_of_simple_functions() {
    let ss = polytrope_state();
    let e = 0.5 * (ss.u0() + ss.e0());
    let orbit = angle_chart(&ss, e, 0.5 * l_max(&ss, e).unwrap(), 128).unwrap();
    let c = orbit.fourier(|_| 1.0, 4);
    assert!((c[0] - 2.0).abs() < 1e-14 && c[1..].iter().all(|x| x.abs() < 1e-14));
    let c = orbit.fourier(|r| orbit.theta_of_r(r).cos(), 4);
    assert!((c[1] - 1.0).abs() < 1e-10, "{c:?}");
    assert!(c.iter().enumerate().filter(|(k, _)| *k != 1).all(|(_, x)| x.abs() < 1e-10), "{c:?}");
    // Parseval against direct quadrature of f² over a full period.
    let f = |r: f64| r * r + 0.3 * r;
    let c = orbit.fourier(f, 64);
    let lhs = 0.5 * c[0] * c[0] + c[1..].iter().map(|x| x * x).sum::<f64>();
    let n = 4000;
    let quad: f64 = (0..n)
        .map(|j| {
            let theta = PI * (j as f64 + 0.5) / n as f64;
            f(orbit.r_of_theta(theta)).powi(2)
        })
        .sum::<f64>()
        * (PI / n as f64);
    // θ ∈ [π, 2π) mirrors [0, π), so (1/π)∫₀^{2π} = (2/π)∫₀^π.
    assert!((lhs - 2.0 / PI * quad).abs() < 1e-8 * lhs, "{lhs} vs {}", 2.0 / PI * quad);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chart_round_trip(s in 0.05f64..0.95, t in 0.0f64..0.98, seed in 0u64..1000) {
        let iso = ExternalPotential::isochrone(1.0, 1.0).unwrap();
        let e = -0.5 + 0.45 * s;
        let orbit = angle_chart(&iso, e, t * l_max(&iso, e).unwrap(), 128).unwrap();
        for j in 0..100u64 {
            let theta = PI * (((seed * 7919 + j * 104729) % 10007) as f64 / 10007.0);
            let back = orbit.theta_of_r(orbit.r_of_theta(theta));
            prop_assert!((back - theta).abs() < 1e-8, "{} -> {}", theta, back);
        }
    }
}
