use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::QuadratureRule;
use crate::numerics::roots::golden_section_min;
use crate::orbits::{
    angle_chart, circular_at_energy, circular_frequency, circular_orbit, orbit_time_integral, period, Orbit,
    DEFAULT_CHART_SAMPLES,
};
use crate::potential::RadialPotential;
use crate::scalar::Real;
use crate::steady_state::SteadyState;

/// Radial frequency as a function of `(E, L)`.
pub trait FrequencyModel<T: Real>: Send + Sync {
    fn omega(&self, e: T, l: T) -> Result<T>;
}

/// `ω_r(E, L)` of a potential, continued to the circular boundary by the
/// epicyclic frequency.
pub fn radial_frequency<T: Real, P: RadialPotential<T> + ?Sized>(p: &P, e: T, l: T) -> Result<T> {
    match period(p, e, l) {
        Ok((_, w)) => Ok(w),
        Err(Error::BelowCircularEnergy { e_min, .. })
            if l > T::zero() && (e_min - e.to_f64_lossy()) <= 1e-9 * e_min.abs().max(1e-300) =>
        {
            let (rs, _) = circular_orbit(p, l)?;
            Ok(circular_frequency(p, rs))
        }
        Err(err) => Err(Error::PeriodFailure {
            e: e.to_f64_lossy(),
            l: l.to_f64_lossy(),
            source: Box::new(err),
        }),
    }
}

/// Orbital frequencies computed from a potential on demand.
pub struct OrbitalFrequency<'a, P: ?Sized> {
    potential: &'a P,
}

impl<'a, P: ?Sized> OrbitalFrequency<'a, P> {
    pub fn new(potential: &'a P) -> Self {
        Self { potential }
    }
}

impl<T: Real, P: RadialPotential<T> + ?Sized> FrequencyModel<T> for OrbitalFrequency<'_, P> {
    fn omega(&self, e: T, l: T) -> Result<T> {
        radial_frequency(self.potential, e, l)
    }
}

/// `ω = ω* + a (E0 - E) + b L²`, the local expansion at the radial orbit
/// of the cutoff energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerExpansion<T> {
    pub omega_star: T,
    pub a: T,
    pub b: T,
    pub e0: T,
}

impl<T: Real> FrequencyModel<T> for CornerExpansion<T> {
    fn omega(&self, e: T, l: T) -> Result<T> {
        Ok(self.omega_star + self.a * (self.e0 - e) + self.b * l * l)
    }
}

/// Energy range of a map and the grading power toward its upper end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapDomain<T> {
    pub e_lo: T,
    pub e_hi: T,
    /// `s = 1 - (1 - ξ)^p` clusters nodes at `E = e_hi`.
    pub grading: T,
}

impl<T: Real> MapDomain<T> {
    /// Full support `(U0, E0)` of a steady state, graded so that the
    /// cutoff behaviour of `φ'` is integrated without loss of order.
    pub fn of_state(ss: &SteadyState<T>) -> Self {
        let q = ss.df().cutoff_exponent() - T::one();
        let g = crate::steady_state::df::grading_power(q).max(T::lit(2.0));
        Self {
            e_lo: ss.u0(),
            e_hi: ss.e0(),
            grading: g,
        }
    }

    pub fn energy(&self, s: T) -> T {
        self.e_lo + (self.e_hi - self.e_lo) * s
    }

    pub fn scaled_energy(&self, e: T) -> T {
        (e - self.e_lo) / (self.e_hi - self.e_lo)
    }
}

/// Quadrature point of the `(E, L)` tensor grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseNode<T> {
    pub e: T,
    pub l: T,
    pub s: T,
    pub t: T,
    pub l_max: T,
    /// Weight for `∫∫ dE dL`.
    pub area_weight: T,
}

/// Graded Gauss–Legendre nodes over `{e_lo < E < e_hi, 0 ≤ L < L_max(E)}`
/// with `t = L/L_max = sin²(πη/2)`. Ordered energy-major.
pub fn phase_nodes<T: Real, P: RadialPotential<T> + ?Sized>(
    p: &P,
    domain: &MapDomain<T>,
    n_e: usize,
    n_l: usize,
) -> Result<Vec<PhaseNode<T>>> {
    if n_e == 0 || n_l == 0 {
        return Err(Error::InvalidParameter("map resolution must be positive".into()));
    }
    if !(domain.e_hi > domain.e_lo) {
        return Err(Error::EmptyInterval {
            a: domain.e_lo.to_f64_lossy(),
            b: domain.e_hi.to_f64_lossy(),
        });
    }
    let re = QuadratureRule::gauss_legendre(n_e);
    let rl = QuadratureRule::gauss_legendre(n_l);
    let pw = domain.grading;
    let width = domain.e_hi - domain.e_lo;
    let half_pi = T::FRAC_PI_2();
    let mut out = Vec::with_capacity(n_e * n_l);
    for (xi, wxi) in re.mapped(T::zero(), T::one()) {
        let om = T::one() - xi;
        let s = T::one() - om.powf(pw);
        let ds = pw * om.powf(pw - T::one());
        let e = domain.energy(s);
        let (_, l_max) = circular_at_energy(p, e)?;
        for (eta, weta) in rl.mapped(T::zero(), T::one()) {
            let sn = (half_pi * eta).sin();
            let t = sn * sn;
            let dt = half_pi * (T::PI() * eta).sin();
            out.push(PhaseNode {
                e,
                l: t * l_max,
                s,
                t,
                l_max,
                area_weight: wxi * weta * width * ds * l_max * dt,
            });
        }
    }
    Ok(out)
}

/// One node of a [`FrequencyMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapNode<T> {
    pub node: PhaseNode<T>,
    pub omega: T,
    /// Phase-space weight `8π² L / ω · dE dL`; with `dθ` over `[0, 2π)`
    /// this is the measure `d³x d³v`.
    pub weight: T,
    /// `2 ∫ dr / (r v_r)` over one radial oscillation, so that
    /// `ω/2π` times it averages `1/r` over the orbit.
    pub inv_r_time: T,
    pub orbit: Orbit<T>,
}

/// `ω_r` over the support in `(E, L)` with its minimum `ω*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMap<T> {
    pub domain: MapDomain<T>,
    pub n_e: usize,
    pub n_l: usize,
    pub nodes: Vec<MapNode<T>>,
    pub omega_star: T,
    /// Polished location `(E, L)` of the minimum.
    pub argmin: (T, T),
    /// Scaled coordinates `(s, t)` of `argmin`.
    pub argmin_scaled: (T, T),
    /// Grid nodes with `ω` within `1e-8 ω*` of the minimum.
    pub argmins: Vec<(T, T)>,
    pub on_circular: bool,
    pub omega_max: T,
    /// One-sided difference of `ω(E, 0)` at `E = e_hi`.
    pub d_omega_d_e_corner: T,
}

impl<T: Real> FrequencyMap<T> {
    /// Whether the minimum sits at `(e_hi, 0)`.
    pub fn argmin_at_corner(&self) -> bool {
        let tol = T::lit(1e-6);
        self.argmin_scaled.0 > T::one() - tol && self.argmin_scaled.1 < tol
    }

    pub fn nodal_min(&self) -> T {
        self.nodes.iter().map(|n| n.omega).fold(T::infinity(), T::min)
    }
}

/// Map over the full support of a solved state.
pub fn build_frequency_map<T: Real>(ss: &SteadyState<T>, n_e: usize, n_l: usize) -> Result<FrequencyMap<T>> {
    build_frequency_map_on(ss, &MapDomain::of_state(ss), n_e, n_l, DEFAULT_CHART_SAMPLES)
}

/// Map over an explicit energy range of any potential.
pub fn build_frequency_map_on<T: Real, P: RadialPotential<T> + ?Sized>(
    p: &P,
    domain: &MapDomain<T>,
    n_e: usize,
    n_l: usize,
    chart_samples: usize,
) -> Result<FrequencyMap<T>> {
    let pts = phase_nodes(p, domain, n_e, n_l)?;
    let eight_pi2 = T::lit(8.0) * T::PI() * T::PI();
    let nodes: Vec<MapNode<T>> = pts
        .par_iter()
        .map(|pn| -> Result<MapNode<T>> {
            let wrap = |err: Error| Error::PeriodFailure {
                e: pn.e.to_f64_lossy(),
                l: pn.l.to_f64_lossy(),
                source: Box::new(err),
            };
            let orbit = angle_chart(p, pn.e, pn.l, chart_samples).map_err(wrap)?;
            let inv_r_time = orbit_time_integral(p, pn.e, pn.l, |r| T::one() / r).map_err(wrap)?;
            Ok(MapNode {
                node: *pn,
                omega: orbit.omega,
                weight: eight_pi2 * pn.l / orbit.omega * pn.area_weight,
                inv_r_time,
                orbit,
            })
        })
        .collect::<Result<_>>()?;

    let omega_max = nodes.iter().map(|n| n.omega).fold(T::neg_infinity(), T::max);
    let (k_best, _) = nodes
        .iter()
        .enumerate()
        .fold((0, T::infinity()), |(kb, wb), (k, n)| if n.omega < wb { (k, n.omega) } else { (kb, wb) });
    let (i, j) = (k_best / n_l, k_best % n_l);
    let s_at = |ii: usize| nodes[ii * n_l].node.s;
    let t_at = |jj: usize| nodes[jj].node.t;
    let s_lo = if i == 0 { s_at(0) * T::lit(0.5) } else { s_at(i - 1) };
    let s_hi = if i + 1 == n_e { T::one() } else { s_at(i + 1) };
    let t_lo = if j == 0 { T::zero() } else { t_at(j - 1) };
    let t_hi = if j + 1 == n_l { T::one() } else { t_at(j + 1) };

    let omega_st = |s: T, t: T| -> T {
        let e = domain.energy(s);
        circular_at_energy(p, e)
            .and_then(|(_, lm)| radial_frequency(p, e, t * lm))
            .unwrap_or(T::infinity())
    };
    let mut best = (nodes[k_best].omega, nodes[k_best].node.s, nodes[k_best].node.t);
    let consider = |w: T, s: T, t: T, best: &mut (T, T, T)| {
        if w < best.0 {
            *best = (w, s, t);
        }
    };
    let tol = T::epsilon().sqrt() * T::lit(1e-2);
    let mut t = best.2;
    for _ in 0..4 {
        let (s, _) = golden_section_min(|x| omega_st(x, t), s_lo, s_hi, tol);
        let (t_new, w) = golden_section_min(|y| omega_st(s, y), t_lo, t_hi, tol);
        t = t_new;
        consider(w, s, t, &mut best);
    }
    // The closed domain includes its edges; golden section never evaluates them.
    let mut edge_s = vec![best.1];
    if i + 1 == n_e {
        edge_s.push(T::one());
    }
    let mut edge_t = vec![best.2];
    if j == 0 {
        edge_t.push(T::zero());
    }
    if j + 1 == n_l {
        edge_t.push(T::one());
    }
    for &es in &edge_s {
        for &et in &edge_t {
            consider(omega_st(es, et), es, et, &mut best);
        }
    }
    let (omega_star, s_star, t_star) = best;
    let e_star = domain.energy(s_star);
    let l_star = circular_at_energy(p, e_star).map(|(_, lm)| lm * t_star)?;
    let close = omega_star * T::lit(1e-8);
    let argmins: Vec<(T, T)> = nodes
        .iter()
        .filter(|n| n.omega - omega_star <= close)
        .map(|n| (n.node.e, n.node.l))
        .collect();
    let circ = T::one() - T::lit(1e-6);
    let on_circular = t_star > circ || nodes.iter().any(|n| n.omega - omega_star <= close && n.node.t > circ);

    let h = (domain.e_hi - domain.e_lo) * T::lit(1e-4);
    let w_top = radial_frequency(p, domain.e_hi, T::zero())?;
    let w_below = radial_frequency(p, domain.e_hi - h, T::zero())?;

    Ok(FrequencyMap {
        domain: *domain,
        n_e,
        n_l,
        nodes,
        omega_star,
        argmin: (e_star, l_star),
        argmin_scaled: (s_star, t_star),
        argmins,
        on_circular,
        omega_max,
        d_omega_d_e_corner: (w_top - w_below) / h,
    })
}

/// Least-squares fit of `ω - ω* = a (E0 - E) + b L²` on the map nodes in
/// the quarter of the grid nearest to `(e_hi, 0)`.
pub fn fit_corner_expansion<T: Real>(fm: &FrequencyMap<T>) -> CornerExpansion<T> {
    let e0 = fm.domain.e_hi;
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let i0 = fm.n_e - (fm.n_e / 4).max(2).min(fm.n_e);
    let j1 = (fm.n_l / 4).max(2).min(fm.n_l);
    for i in i0..fm.n_e {
        for j in 0..j1 {
            let n = &fm.nodes[i * fm.n_l + j];
            let x = e0 - n.node.e;
            let y = n.node.l * n.node.l;
            let z = n.omega - fm.omega_star;
            sxx = sxx + x * x;
            sxy = sxy + x * y;
            syy = syy + y * y;
            sxz = sxz + x * z;
            syz = syz + y * z;
        }
    }
    let det = sxx * syy - sxy * sxy;
    let (a, b) = if det.abs() > T::min_positive_value() {
        ((sxz * syy - syz * sxy) / det, (syz * sxx - sxz * sxy) / det)
    } else {
        (T::zero(), T::zero())
    };
    CornerExpansion {
        omega_star: fm.omega_star,
        a,
        b,
        e0,
    }
}

/// One merged interval `[lo, hi]` of `∪_k k² [ω_min², ω_max²]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band<T> {
    pub k_first: usize,
    pub k_last: usize,
    pub lo: T,
    pub hi: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssentialSpectrum<T> {
    /// `(0, ω*²)`.
    pub gap: (T, T),
    /// `{0}` is always part of the essential spectrum.
    pub contains_zero: bool,
    pub bands: Vec<Band<T>>,
}

pub fn essential_bands<T: Real>(fm: &FrequencyMap<T>, k_max: usize) -> EssentialSpectrum<T> {
    let w_lo2 = fm.omega_star * fm.omega_star;
    let w_hi2 = fm.omega_max.max(fm.omega_star).powi(2);
    let mut bands: Vec<Band<T>> = Vec::new();
    for k in 1..=k_max {
        let k2 = T::from_usize_lossy(k * k);
        let (lo, hi) = (k2 * w_lo2, k2 * w_hi2);
        match bands.last_mut() {
            Some(last) if lo <= last.hi => {
                last.hi = last.hi.max(hi);
                last.k_last = k;
            }
            _ => bands.push(Band {
                k_first: k,
                k_last: k,
                lo,
                hi,
            }),
        }
    }
    EssentialSpectrum {
        gap: (T::zero(), w_lo2),
        contains_zero: true,
        bands,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ExternalPotential;

    #[test]
    fn kepler_minimum_at_top_energy() {
        let k = ExternalPotential::kepler(1.0).unwrap();
        let dom = MapDomain {
            e_lo: -0.5,
            e_hi: -0.25,
            grading: 1.0,
        };
        let fm = build_frequency_map_on(&k, &dom, 8, 8, 32).unwrap();
        let expected = 0.5f64.powf(1.5);
        assert!((fm.omega_star - expected).abs() < 1e-9, "{}", fm.omega_star);
        assert!((fm.argmin.0 + 0.25).abs() < 1e-6);
        assert!(fm.nodes.iter().all(|n| n.omega >= fm.omega_star && n.weight >= 0.0));
    }

    #[test]
    fn harmonic_bands_degenerate() {
        let w0 = 0.7f64;
        let h = ExternalPotential::harmonic(w0, 5.0).unwrap();
        let dom = MapDomain {
            e_lo: -4.5,
            e_hi: -1.0,
            grading: 1.0,
        };
        let fm = build_frequency_map_on(&h, &dom, 6, 6, 32).unwrap();
        assert!((fm.omega_star - 2.0 * w0).abs() < 1e-9);
        let es = essential_bands(&fm, 3);
        assert_eq!(es.bands.len(), 3);
        for (k, b) in es.bands.iter().enumerate() {
            let target = 4.0 * ((k + 1) * (k + 1)) as f64 * w0 * w0;
            assert!((b.lo - target).abs() < 1e-7 * target && (b.hi - target).abs() < 1e-7 * target, "{b:?} {target}");
        }
        assert_eq!(es.gap.1, fm.omega_star * fm.omega_star);
    }
}
