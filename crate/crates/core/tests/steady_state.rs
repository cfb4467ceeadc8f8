use std::f64::consts::PI;

use antonov_core::numerics::{integrate_adaptive, QuadratureRule};
use antonov_core::potential::RadialPotential;
use antonov_core::steady_state::{
    polytrope_constant, solve_equilibrium, state_csv, validate_assumptions, SolveConfig,
};
use antonov_core::{DistributionFunction, Error, ExternalPotential, SteadyState};

fn solve(df: &DistributionFunction, ext: Option<&ExternalPotential>, y_c: f64) -> SteadyState {
    solve_equilibrium(df, ext, y_c, &SolveConfig::default()).unwrap()
}

fn polytrope(n: f64, amplitude: f64) -> DistributionFunction {
    DistributionFunction::polytrope(n, amplitude, 0.0).unwrap()
}

/// `4π 2^{3/2} ∫₀¹ s² (1 - s²)ⁿ ds` by adaptive quadrature.
fn beta_oracle(n: f64) -> f64 {
    let v = integrate_adaptive(|s: f64| s * s * (1.0 - s * s).powf(n), 0.0, 1.0, 0.0, 1e-14, 200).unwrap();
    4.0 * PI * 2f64.powf(1.5) * v.value
}

#[test]
fn profile_constant_matches_beta_integral() {
    for n in [0.5, 1.0, 2.0, 3.0] {
        let c = polytrope_constant(n);
        assert!((c - beta_oracle(n)).abs() < 1e-10 * c, "n = {n}");
    }
    let df = polytrope(1.0, 1.0);
    assert!((df.phi_profile(-1.0).unwrap() - beta_oracle(1.0)).abs() < 1e-10);
    let rule = QuadratureRule::gauss_legendre(64);
    let q = df.phi_profile_quadrature(-1.0, &rule).unwrap();
    assert!((q - polytrope_constant(1.0)).abs() < 1e-10);
}

#[test]
fn profile_vanishes_above_cutoff_and_scales_near_it() {
    let df = polytrope(1.5, 2.0);
    assert_eq!(df.phi_profile(0.0).unwrap(), 0.0);
    assert_eq!(df.phi_profile(0.3).unwrap(), 0.0);
    let c = 2.0 * polytrope_constant(1.5);
    for eps in [1e-2, 1e-4, 1e-6] {
        let ratio = df.phi_profile(-eps).unwrap() / eps.powf(3.0);
        assert!((ratio - c).abs() < 1e-9 * c);
    }
}

#[test]
fn lane_emden_index_one_closed_form() {
    let df = DistributionFunction::lane_emden(1.0, 1.0, 0.0).unwrap();
    let ss = solve(&df, None, 1.0);
    let k = (4.0 * PI * polytrope_constant(-0.5)).sqrt();
    let mut worst: f64 = 0.0;
    for i in 0..=1000 {
        let r = ss.r0() * i as f64 / 1000.0;
        let kr = k * r;
        let y = if kr == 0.0 { 1.0 } else { kr.sin() / kr };
        worst = worst.max((ss.value(r) - ss.u0() - (1.0 - y)).abs());
    }
    assert!(worst < 1e-6, "sup error {worst}");
    assert!((ss.r0() - PI / k).abs() < 1e-8);
}

#[test]
fn mass_matches_density_integral() {
    for (n, a, y) in [(1.0, 1.0, 1.0), (0.5, 2.0, 0.7), (2.5, 0.3, 1.5)] {
        let ss = solve(&polytrope(n, a), None, y);
        let m = integrate_adaptive(|r: f64| 4.0 * PI * ss.rho0(r) * r * r, 0.0, ss.r0(), 0.0, 1e-13, 400)
            .unwrap()
            .value;
        assert!((m - ss.mass()).abs() < 1e-6 * ss.mass(), "n = {n}: {m} vs {}", ss.mass());
    }
}

#[test]
fn exterior_matching_and_limits() {
    let plummer = ExternalPotential::plummer(2.0, 1.5).unwrap();
    for ext in [None, Some(&plummer)] {
        let ss = solve(&polytrope(1.0, 1.0), ext, 1.0);
        let u_ext = ext.map_or(0.0, |e| e.value(ss.r0()));
        assert!((ss.value(ss.r0()) + ss.mass() / ss.r0() - u_ext).abs() < 1e-8);
        assert!((ss.e0() + ss.mass() / ss.r0() - u_ext).abs() < 1e-12);
        assert!(ss.e0() < 0.0);
        assert_eq!(ss.eval_state(ss.r0()).unwrap().2, 0.0);
        assert!(ss.value(1e12).abs() < 1e-10);
    }
    let ss = solve(&polytrope(1.0, 1.0), None, 1.0);
    assert!(matches!(ss.eval_state(-0.1), Err(Error::NegativeRadius { .. })));
}

#[test]
fn interpolation_agrees_with_refined_solve() {
    let df = polytrope(1.0, 1.0);
    let coarse = solve(&df, None, 1.0);
    let fine = solve_equilibrium(
        &df,
        None,
        1.0,
        &SolveConfig {
            grid_nodes: 4000,
            ..SolveConfig::default()
        },
    )
    .unwrap();
    for i in 0..97 {
        // Off-grid radii of the coarse table.
        let r = coarse.r0() * (i as f64 + 0.37) / 97.0;
        let (u0, _, _) = coarse.eval_state(r).unwrap();
        let (u1, _, _) = fine.eval_state(r).unwrap();
        assert!((u0 - u1).abs() < 1e-7, "r = {r}: {u0} vs {u1}");
    }
}

#[test]
fn structural_invariants_hold_on_the_grid() {
    for n in [0.5, 1.0, 3.0] {
        let ss = solve(&polytrope(n, 1.0), None, 1.0);
        let r = ss.radii();
        let u = ss.potential_table();
        let du = ss.force_table();
        let rho = ss.density_table();
        assert!(u.windows(2).all(|w| w[1] > w[0]), "n = {n}");
        assert!(rho.windows(2).all(|w| w[1] <= w[0]), "n = {n}");
        let m: Vec<f64> = r.iter().zip(du).map(|(r, d)| r * r * d).collect();
        assert!(m.windows(2).all(|w| w[1] >= w[0] - 1e-12), "n = {n}");
        assert!(ss.e0() < 0.0);
    }
}

#[test]
fn doubling_amplitude_shrinks_support() {
    let a = solve(&polytrope(1.0, 1.0), None, 1.0);
    let b = solve(&polytrope(1.0, 2.0), None, 1.0);
    assert!(b.r0() < a.r0());
    // Homology for a pure power law: R0 ∝ A^{-1/2} at fixed depth.
    assert!((b.r0() * 2f64.sqrt() - a.r0()).abs() < 1e-8);
}

#[test]
fn validation_routes_agree() {
    let ss = solve(&polytrope(1.0, 1.0), None, 1.0);
    let rep = validate_assumptions(&ss).unwrap();
    assert!(rep.relative_gap < 1e-6, "{rep:?}");
    assert!(rep.integrable && rep.violations.is_empty());
    let half = solve(&polytrope(0.5, 1.0), None, 1.0);
    assert!(validate_assumptions(&half).unwrap().integrable);
}

#[test]
fn flat_distribution_segment_is_flagged() {
    let e: Vec<f64> = (0..=40).map(|i| -2.0 + 0.05 * i as f64).collect();
    let phi: Vec<f64> = e.iter().map(|&x| if x < -1.0 { 1.0 } else { -x }).collect();
    let dphi: Vec<f64> = e.iter().map(|&x| if x < -1.0 { 0.0 } else { -1.0 }).collect();
    let df = DistributionFunction::tabulated(&e, &phi, &dphi).unwrap();
    let ss = solve(&df, None, 1.5);
    let rep = validate_assumptions(&ss).unwrap();
    assert!(!rep.dphi_negative);
    assert!(rep.violations.iter().any(|v| v.contains("not strictly negative")), "{:?}", rep.violations);
}

#[test]
fn state_table_serializes() {
    let ss = solve(&polytrope(1.0, 1.0), None, 1.0);
    let csv = state_csv(&ss);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,U,dU,rho0"));
    assert_eq!(lines.count(), ss.radii().len());
    let header = serde_json::to_value(ss.header()).unwrap();
    for key in ["M", "R0", "E0", "U0", "n", "amplitude"] {
        assert!(header.get(key).is_some(), "{key}");
    }
}
