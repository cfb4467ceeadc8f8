//! Isotropic distribution functions `φ(E)` and the density profile
//! `Φ(u) = 4π ∫ φ(E) sqrt(2(E - u))₊ dE` they generate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::interp::{cubic_hermite, segment_index};
use crate::numerics::quadrature::{integrate_graded, integrate_singular_with, GradedEnd, QuadratureRule, SingularEnds};
use crate::scalar::Real;

/// Power of `(E - u)` multiplying the integrand in [`energy_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedWeight {
    /// `sqrt(2(E - u))`: velocity-space volume element.
    Speed,
    /// `1 / sqrt(2(E - u))`.
    InverseSpeed,
}

/// `∫_u^{E0} f(E, E0 - E) w(E - u) dE` where `f` behaves like
/// `(E0 - E)^q` at the cutoff. Both endpoint behaviours are removed by
/// substitution, so the rule converges spectrally for power-law `f`.
pub fn energy_integral<T: Real, F: FnMut(T, T) -> T>(
    rule: &QuadratureRule<T>,
    u: T,
    e0: T,
    weight: SpeedWeight,
    q: T,
    mut f: F,
) -> Result<T> {
    let depth = e0 - u;
    if !(depth > T::zero()) {
        return Ok(T::zero());
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let w = |x: T| -> T {
        let s = (two * depth * x).sqrt();
        match weight {
            SpeedWeight::Speed => s,
            SpeedWeight::InverseSpeed => T::one() / s,
        }
    };
    // x = (E - u)/depth on [0, 1/2] and [1/2, 1].
    let left = integrate_singular_with(
        rule,
        |x| f(u + depth * x, depth * (T::one() - x)) * w(x),
        T::zero(),
        half,
        SingularEnds::Left,
    )?;
    let m = grading_power(q);
    let right = integrate_graded(
        rule,
        |x, d| f(u + depth * x, depth * d) * w(x),
        half,
        T::one(),
        GradedEnd::Right,
        m,
    )?;
    Ok((left + right) * depth)
}

/// Integer grading power `m` making `s^{m(q+1)-1}` a polynomial, when one
/// exists up to 8; otherwise a power that makes the endpoint at least `C²`.
pub(crate) fn grading_power<T: Real>(q: T) -> T {
    let p = q + T::one();
    if !(p > T::zero()) {
        return T::one();
    }
    for m in 1..=8 {
        let e = T::from_usize_lossy(m) * p;
        if (e - e.round()).abs() < T::lit(1e-9) {
            return T::from_usize_lossy(m);
        }
    }
    (T::lit(3.0) / p).ceil().max(T::lit(2.0))
}

/// `c_n = 2^{3/2} π^{3/2} Γ(n+1) / Γ(n+5/2)`, so that a polytrope
/// `φ = (E0 - E)₊^n` gives `Φ(u) = c_n (E0 - u)₊^{n+3/2}`. Requires `n > -1`.
pub fn polytrope_constant<T: Real>(n: T) -> T {
    let nf = n.to_f64_lossy();
    let g = statrs::function::gamma::ln_gamma(nf + 1.0) - statrs::function::gamma::ln_gamma(nf + 2.5);
    let c = (2.0 * std::f64::consts::PI).powf(1.5) * g.exp();
    T::lit(c)
}

/// Sampled `φ` in depth coordinates `d = E_cut - E ≥ 0`, with `Φ` and
/// `dΦ/dd` precomputed on a depth table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfTable<T> {
    depth: Vec<T>,
    phi: Vec<T>,
    /// `dφ/dd = -φ'(E)`.
    dphi_dd: Vec<T>,
    big_depth: Vec<T>,
    big_phi: Vec<T>,
    big_dphi: Vec<T>,
}

const PROFILE_TABLE: usize = 513;

impl<T: Real> DfTable<T> {
    fn phi_at(&self, d: T) -> T {
        if d <= T::zero() {
            return T::zero();
        }
        let i = segment_index(&self.depth, d);
        let h = self.depth[i + 1] - self.depth[i];
        let t = ((d - self.depth[i]) / h).min(T::one());
        cubic_hermite(t, h, self.phi[i], self.dphi_dd[i], self.phi[i + 1], self.dphi_dd[i + 1]).0
    }

    fn dphi_dd_at(&self, d: T) -> T {
        if d <= T::zero() {
            return self.dphi_dd[0];
        }
        let i = segment_index(&self.depth, d);
        let h = self.depth[i + 1] - self.depth[i];
        let t = ((d - self.depth[i]) / h).min(T::one());
        cubic_hermite(t, h, self.phi[i], self.dphi_dd[i], self.phi[i + 1], self.dphi_dd[i + 1]).1
    }

    fn max_depth(&self) -> T {
        *self.depth.last().expect("non-empty table")
    }

    fn profile(&self, y: T) -> Result<T> {
        if y <= T::zero() {
            return Ok(T::zero());
        }
        let top = self.max_depth();
        if y > top * (T::one() + T::tight_tol()) {
            return Err(Error::TableUnderresolved {
                depth: y.to_f64_lossy(),
                covered: top.to_f64_lossy(),
            });
        }
        let y = y.min(top);
        let i = segment_index(&self.big_depth, y);
        let h = self.big_depth[i + 1] - self.big_depth[i];
        let t = (y - self.big_depth[i]) / h;
        Ok(cubic_hermite(t, h, self.big_phi[i], self.big_dphi[i], self.big_phi[i + 1], self.big_dphi[i + 1]).0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DfKind<T> {
    /// `φ(E) = A (E0 - E)₊^n`.
    Polytrope { n: T },
    Tabulated(DfTable<T>),
}

/// Isotropic distribution function `φ(E)` supported below the cutoff `E0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionFunction<T> {
    kind: DfKind<T>,
    amplitude: T,
    e0: T,
}

impl<T: Real> DistributionFunction<T> {
    /// Polytrope `A (E0 - E)₊^n` with `n ∈ (0, 7/2)`.
    pub fn polytrope(n: T, amplitude: T, e0: T) -> Result<Self> {
        if !(n > T::zero() && n < T::lit(3.5)) {
            return Err(Error::InvalidParameter(format!("polytrope exponent must lie in (0, 7/2), got {n}")));
        }
        Self::power_law(n, amplitude, e0)
    }

    /// Polytrope whose density obeys the Lane–Emden equation of the given
    /// index, `ρ ∝ y^index`; the phase-space exponent is `index - 3/2`.
    ///
    /// Indices `≤ 3/2` give `φ` nondecreasing in `E`, which validation flags.
    pub fn lane_emden(index: T, amplitude: T, e0: T) -> Result<Self> {
        let n = index - T::lit(1.5);
        if !(n > -T::one() && n < T::lit(3.5)) {
            return Err(Error::InvalidParameter(format!("Lane–Emden index must lie in (1/2, 5), got {index}")));
        }
        Self::power_law(n, amplitude, e0)
    }

    fn power_law(n: T, amplitude: T, e0: T) -> Result<Self> {
        if !(amplitude > T::zero() && amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude must be positive, got {amplitude}")));
        }
        if !e0.is_finite() {
            return Err(Error::InvalidParameter(format!("cutoff energy must be finite, got {e0}")));
        }
        Ok(Self {
            kind: DfKind::Polytrope { n },
            amplitude,
            e0,
        })
    }

    /// Tabulated `φ` from ascending energies with values and derivatives
    /// `φ'(E)`. The last energy is the cutoff, where `φ` must vanish.
    pub fn tabulated(energies: &[T], phi: &[T], dphi: &[T]) -> Result<Self> {
        let n = energies.len();
        if n < 2 || phi.len() != n || dphi.len() != n {
            return Err(Error::InvalidParameter(
                "tabulated distribution needs at least two rows of (E, phi, dphi)".into(),
            ));
        }
        if !energies.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("tabulated energies must be strictly increasing".into()));
        }
        let cut = energies[n - 1];
        let scale = phi.iter().fold(T::zero(), |m, &p| m.max(p.abs()));
        if phi[n - 1].abs() > scale * T::tight_tol() {
            return Err(Error::InvalidParameter(format!(
                "tabulated phi must vanish at the cutoff E = {cut}, got {}",
                phi[n - 1]
            )));
        }
        if phi.iter().any(|&p| p < T::zero() || !p.is_finite()) {
            return Err(Error::InvalidParameter("tabulated phi must be finite and non-negative".into()));
        }
        let depth: Vec<T> = energies.iter().rev().map(|&e| cut - e).collect();
        let phi_d: Vec<T> = phi.iter().rev().copied().collect();
        let dphi_dd: Vec<T> = dphi.iter().rev().map(|&d| -d).collect();
        let mut table = DfTable {
            depth,
            phi: phi_d,
            dphi_dd,
            big_depth: vec![],
            big_phi: vec![],
            big_dphi: vec![],
        };
        // Φ(y) and dΦ/dy = 4π ∫ φ / sqrt(2(E - u)) dE on a depth table.
        let rule = QuadratureRule::gauss_legendre(48);
        let top = table.max_depth();
        let mut big_depth = Vec::with_capacity(PROFILE_TABLE);
        let mut big_phi = Vec::with_capacity(PROFILE_TABLE);
        let mut big_dphi = Vec::with_capacity(PROFILE_TABLE);
        for k in 0..PROFILE_TABLE {
            let x = T::from_usize_lossy(k) / T::from_usize_lossy(PROFILE_TABLE - 1);
            let y = top * x * x;
            let (p, dp) = if y == T::zero() {
                (T::zero(), T::zero())
            } else {
                let p = energy_integral(&rule, -y, T::zero(), SpeedWeight::Speed, T::zero(), |_, d| table.phi_at(d))?;
                let dp =
                    energy_integral(&rule, -y, T::zero(), SpeedWeight::InverseSpeed, T::zero(), |_, d| table.phi_at(d))?;
                (p * T::four_pi(), dp * T::four_pi())
            };
            big_depth.push(y);
            big_phi.push(p);
            big_dphi.push(dp);
        }
        table.big_depth = big_depth;
        table.big_phi = big_phi;
        table.big_dphi = big_dphi;
        Ok(Self {
            kind: DfKind::Tabulated(table),
            amplitude: T::one(),
            e0: cut,
        })
    }

    /// Same profile re-anchored to a new cutoff energy.
    pub fn with_cutoff(&self, e0: T) -> Self {
        Self {
            kind: self.kind.clone(),
            amplitude: self.amplitude,
            e0,
        }
    }

    /// Same profile with the amplitude multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        match &self.kind {
            DfKind::Polytrope { .. } => Self {
                kind: self.kind.clone(),
                amplitude: self.amplitude * s,
                e0: self.e0,
            },
            DfKind::Tabulated(t) => {
                let mut t = t.clone();
                for v in t.phi.iter_mut().chain(t.dphi_dd.iter_mut()) {
                    *v = *v * s;
                }
                for v in t.big_phi.iter_mut().chain(t.big_dphi.iter_mut()) {
                    *v = *v * s;
                }
                Self {
                    kind: DfKind::Tabulated(t),
                    amplitude: self.amplitude,
                    e0: self.e0,
                }
            }
        }
    }

    pub fn kind(&self) -> &DfKind<T> {
        &self.kind
    }

    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    pub fn cutoff(&self) -> T {
        self.e0
    }

    /// Polytrope exponent, `None` for tables.
    pub fn exponent(&self) -> Option<T> {
        match self.kind {
            DfKind::Polytrope { n } => Some(n),
            DfKind::Tabulated(_) => None,
        }
    }

    /// Exponent `q` of the behaviour `φ ∼ (E0 - E)^q` at the cutoff.
    pub fn cutoff_exponent(&self) -> T {
        self.exponent().unwrap_or(T::zero())
    }

    /// Largest depth below the cutoff covered by the profile.
    pub fn max_depth(&self) -> Option<T> {
        match &self.kind {
            DfKind::Polytrope { .. } => None,
            DfKind::Tabulated(t) => Some(t.max_depth()),
        }
    }

    /// `φ` as a function of depth `d = E0 - E`.
    pub fn phi_of_depth(&self, d: T) -> T {
        if d <= T::zero() {
            return T::zero();
        }
        match &self.kind {
            DfKind::Polytrope { n } => self.amplitude * d.powf(*n),
            DfKind::Tabulated(t) => t.phi_at(d),
        }
    }

    /// `φ'(E)` as a function of depth; negative on the support for a
    /// decreasing profile.
    pub fn dphi_of_depth(&self, d: T) -> T {
        if d <= T::zero() {
            return T::zero();
        }
        match &self.kind {
            DfKind::Polytrope { n } => -self.amplitude * *n * d.powf(*n - T::one()),
            DfKind::Tabulated(t) => -t.dphi_dd_at(d),
        }
    }

    pub fn phi(&self, e: T) -> T {
        self.phi_of_depth(self.e0 - e)
    }

    pub fn dphi(&self, e: T) -> T {
        self.dphi_of_depth(self.e0 - e)
    }

    pub fn abs_dphi(&self, e: T) -> T {
        self.dphi(e).abs()
    }

    /// `Φ` at depth `y = E0 - u`.
    pub fn profile_of_depth(&self, y: T) -> Result<T> {
        if y <= T::zero() {
            return Ok(T::zero());
        }
        match &self.kind {
            DfKind::Polytrope { n } => Ok(self.amplitude * polytrope_constant(*n) * y.powf(*n + T::lit(1.5))),
            DfKind::Tabulated(t) => t.profile(y),
        }
    }

    /// `Φ(u) = 4π ∫ φ(E) sqrt(2(E - u))₊ dE`.
    pub fn phi_profile(&self, u: T) -> Result<T> {
        if !u.is_finite() {
            return Err(Error::InvalidParameter(format!("energy must be finite, got {u}")));
        }
        self.profile_of_depth(self.e0 - u)
    }

    /// `Φ(u)` by direct quadrature of the defining integral; independent of
    /// the closed form and of the precomputed table.
    pub fn phi_profile_quadrature(&self, u: T, rule: &QuadratureRule<T>) -> Result<T> {
        if let Some(top) = self.max_depth() {
            if self.e0 - u > top * (T::one() + T::tight_tol()) {
                return Err(Error::TableUnderresolved {
                    depth: (self.e0 - u).to_f64_lossy(),
                    covered: top.to_f64_lossy(),
                });
            }
        }
        let v = energy_integral(rule, u, self.e0, SpeedWeight::Speed, self.cutoff_exponent(), |_, d| {
            self.phi_of_depth(d)
        })?;
        Ok(v * T::four_pi())
    }

    /// `ρ_{|φ'|}` at depth `y`: the density generated by `|φ'|`.
    pub fn abs_dphi_density(&self, y: T, rule: &QuadratureRule<T>) -> Result<T> {
        if y <= T::zero() {
            return Ok(T::zero());
        }
        match &self.kind {
            DfKind::Polytrope { n } => {
                let n = *n;
                if n > T::zero() {
                    Ok(self.amplitude * n * polytrope_constant(n - T::one()) * y.powf(n + T::lit(0.5)))
                } else {
                    let v = energy_integral(rule, -y, T::zero(), SpeedWeight::Speed, n - T::one(), |_, d| {
                        self.dphi_of_depth(d).abs()
                    })?;
                    Ok(v * T::four_pi())
                }
            }
            DfKind::Tabulated(_) => {
                let v = energy_integral(rule, -y, T::zero(), SpeedWeight::Speed, T::zero(), |_, d| {
                    self.dphi_of_depth(d).abs()
                })?;
                Ok(v * T::four_pi())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn beta_oracle(n: f64) -> f64 {
        // 4π 2^{3/2} ∫₀¹ s² (1 - s²)^n ds by adaptive quadrature.
        let r = crate::numerics::integrate_adaptive(|s: f64| s * s * (1.0 - s * s).powf(n), 0.0, 1.0, 1e-15, 1e-14, 2000)
            .unwrap();
        4.0 * PI * 2f64.powf(1.5) * r.value
    }

    #[test]
    fn polytrope_constant_matches_beta_integral() {
        for n in [0.5, 1.0, 1.5, 2.0, 3.0, 3.4] {
            let c = polytrope_constant::<f64>(n);
            assert!((c - beta_oracle(n)).abs() < 1e-10 * c, "n={n}");
        }
        assert!((polytrope_constant::<f64>(1.0) - 16.0 * 2f64.sqrt() * PI / 15.0).abs() < 1e-13);
        assert!((polytrope_constant::<f64>(-0.5) - 2f64.powf(1.5) * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let rule = QuadratureRule::gauss_legendre(64);
        for n in [0.5f64, 1.0, 2.0, 3.2] {
            let df = DistributionFunction::polytrope(n, 1.3, -0.2).unwrap();
            for u in [-1.5, -0.7, -0.25] {
                let a = df.phi_profile(u).unwrap();
                let b = df.phi_profile_quadrature(u, &rule).unwrap();
                assert!((a - b).abs() < 1e-11 * a, "n={n} u={u} {a} {b}");
            }
        }
    }

    #[test]
    fn profile_vanishes_above_cutoff_and_scales_near_it() {
        let df = DistributionFunction::polytrope(1.0, 1.0, 0.0).unwrap();
        assert_eq!(df.phi_profile(0.0).unwrap(), 0.0);
        assert_eq!(df.phi_profile(0.3).unwrap(), 0.0);
        let c1 = polytrope_constant::<f64>(1.0);
        assert!((df.phi_profile(-1.0).unwrap() - c1).abs() < 1e-14);
        let eps = 1e-6;
        assert!((df.phi_profile(-eps).unwrap() / eps.powf(2.5) - c1).abs() < 1e-9);
    }

    #[test]
    fn table_reproduces_polytrope() {
        let n = 2.0;
        let e: Vec<f64> = (0..=200).map(|i| -2.0 + 2.0 * i as f64 / 200.0).collect();
        let phi: Vec<f64> = e.iter().map(|&x| (-x).powf(n)).collect();
        let dphi: Vec<f64> = e.iter().map(|&x| -n * (-x).powf(n - 1.0)).collect();
        let tab = DistributionFunction::tabulated(&e, &phi, &dphi).unwrap();
        let poly = DistributionFunction::polytrope(n, 1.0, 0.0).unwrap();
        for u in [-1.9, -1.0, -0.3, -0.01] {
            let a = tab.phi_profile(u).unwrap();
            let b = poly.phi_profile(u).unwrap();
            assert!((a - b).abs() < 1e-6 * b, "u={u} {a} {b}");
        }
        assert!(matches!(tab.phi_profile(-2.5), Err(Error::TableUnderresolved { .. })));
    }

    #[test]
    fn parameter_checks() {
        assert!(DistributionFunction::polytrope(0.0, 1.0, 0.0).is_err());
        assert!(DistributionFunction::polytrope(3.5, 1.0, 0.0).is_err());
        assert!(DistributionFunction::polytrope(1.0, -1.0, 0.0).is_err());
        assert!(DistributionFunction::lane_emden(1.0, 1.0, 0.0).is_ok());
        assert!(DistributionFunction::tabulated(&[0.0, 1.0], &[1.0, 1.0], &[0.0, 0.0]).is_err());
    }
}
