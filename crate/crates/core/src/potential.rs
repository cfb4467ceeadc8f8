//! Spherically symmetric potentials: the trait consumed by orbit and
//! response code, external potentials given as closures, and the analytic
//! Kepler, isochrone, Plummer and harmonic profiles.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A radial potential `U(r)` with `ΔU = 4πρ`.
pub trait RadialPotential<T: Real>: Send + Sync {
    fn value(&self, r: T) -> T;

    fn deriv(&self, r: T) -> T;

    /// `ΔU / 4π`.
    fn density(&self, r: T) -> T;

    /// `U''` from the Poisson equation; finite at the origin.
    fn second_deriv(&self, r: T) -> T {
        let four_pi = T::four_pi();
        if r == T::zero() {
            four_pi * self.density(T::zero()) / T::lit(3.0)
        } else {
            four_pi * self.density(r) - T::lit(2.0) * self.deriv(r) / r
        }
    }

    /// `U(0)`; `-∞` for point masses.
    fn central_value(&self) -> T {
        self.value(T::zero())
    }

    /// `lim U(r)` as `r → ∞`: the escape energy.
    fn escape_value(&self) -> T {
        T::zero()
    }

    /// Characteristic radius used to seed root brackets.
    fn length_scale(&self) -> T;
}

type Profile<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Externally imposed radial potential given as three consistent closures:
/// `U_ext`, `U_ext'` and `ΔU_ext / 4π`.
#[derive(Clone)]
pub struct ExternalPotential<T> {
    name: String,
    value: Profile<T>,
    deriv: Profile<T>,
    density: Profile<T>,
    scale: T,
    escape: T,
}

impl<T: fmt::Debug> fmt::Debug for ExternalPotential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalPotential")
            .field("name", &self.name)
            .field("scale", &self.scale)
            .finish()
    }
}

/// Where and by how much the closures disagree with finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport<T> {
    pub max_deriv_error: T,
    pub max_density_error: T,
}

impl<T: Real> ExternalPotential<T> {
    /// Builds from closures and checks their mutual consistency at 16 radii
    /// spread over `[scale/100, 100·scale]`.
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(T) -> T + Send + Sync + 'static,
        deriv: impl Fn(T) -> T + Send + Sync + 'static,
        density: impl Fn(T) -> T + Send + Sync + 'static,
        scale: T,
    ) -> Result<Self> {
        let p = Self::new_unchecked(name, value, deriv, density, scale, T::zero());
        let report = p.consistency();
        let tol = T::epsilon().sqrt().sqrt() * T::lit(0.1);
        if !(report.max_deriv_error <= tol && report.max_density_error <= tol) {
            return Err(Error::InvalidParameter(format!(
                "external potential '{}' closures inconsistent: derivative error {}, density error {}",
                p.name, report.max_deriv_error, report.max_density_error
            )));
        }
        Ok(p)
    }

    fn new_unchecked(
        name: impl Into<String>,
        value: impl Fn(T) -> T + Send + Sync + 'static,
        deriv: impl Fn(T) -> T + Send + Sync + 'static,
        density: impl Fn(T) -> T + Send + Sync + 'static,
        scale: T,
        escape: T,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            deriv: Arc::new(deriv),
            density: Arc::new(density),
            scale,
            escape,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Plummer sphere `U = -m / sqrt(r² + b²)`.
    pub fn plummer(mass: T, b: T) -> Result<Self> {
        positive("mass", mass)?;
        positive("b", b)?;
        let b2 = b * b;
        let c = T::lit(3.0) * mass * b2 / T::four_pi();
        Ok(Self::new_unchecked(
            format!("plummer(m={mass}, b={b})"),
            move |r: T| -mass / (r * r + b2).sqrt(),
            move |r: T| mass * r / (r * r + b2).powf(T::lit(1.5)),
            move |r: T| c / (r * r + b2).powf(T::lit(2.5)),
            b,
            T::zero(),
        ))
    }

    /// Isochrone `U = -m / (b + sqrt(b² + r²))`.
    pub fn isochrone(mass: T, b: T) -> Result<Self> {
        positive("mass", mass)?;
        positive("b", b)?;
        let b2 = b * b;
        Ok(Self::new_unchecked(
            format!("isochrone(m={mass}, b={b})"),
            move |r: T| -mass / (b + (b2 + r * r).sqrt()),
            move |r: T| {
                let a = (b2 + r * r).sqrt();
                mass * r / (a * (b + a) * (b + a))
            },
            move |r: T| {
                // Binney & Tremaine closed form of the isochrone density.
                let a = (b2 + r * r).sqrt();
                let num = T::lit(3.0) * (b + a) * a * a - r * r * (b + T::lit(3.0) * a);
                mass * num / (T::four_pi() * (b + a).powi(3) * a.powi(3))
            },
            b,
            T::zero(),
        ))
    }

    /// Point mass `U = -m / r`.
    pub fn kepler(mass: T) -> Result<Self> {
        positive("mass", mass)?;
        Ok(Self::new_unchecked(
            format!("kepler(m={mass})"),
            move |r: T| -mass / r,
            move |r: T| mass / (r * r),
            |_r: T| T::zero(),
            T::one(),
            T::zero(),
        ))
    }

    /// Harmonic well `U = ω₀² r² / 2 - depth`; it does not vanish at
    /// infinity and is meant for orbit checks only.
    pub fn harmonic(omega0: T, depth: T) -> Result<Self> {
        positive("omega0", omega0)?;
        let w2 = omega0 * omega0;
        let rho = T::lit(3.0) * w2 / T::four_pi();
        Ok(Self::new_unchecked(
            format!("harmonic(omega0={omega0}, depth={depth})"),
            move |r: T| w2 * r * r * T::lit(0.5) - depth,
            move |r: T| w2 * r,
            move |_r: T| rho,
            T::one() / omega0,
            T::infinity(),
        ))
    }

    /// Maximum relative mismatch of `U'` and `ρ` against central finite
    /// differences at 16 log-spaced radii.
    pub fn consistency(&self) -> ConsistencyReport<T> {
        let mut de = T::zero();
        let mut dr = T::zero();
        let h_rel = T::epsilon().powf(T::lit(0.25));
        for i in 0..16 {
            let x = T::lit(-2.0) + T::lit(4.0) * T::from_usize_lossy(i) / T::lit(15.0);
            let r = self.scale * T::lit(10.0).powf(x);
            let h = r * h_rel;
            let fd = (self.val(r + h) - self.val(r - h)) / (h + h);
            let d = (self.deriv)(r);
            let scale = d.abs().max(self.val(r).abs() / r).max(T::min_positive_value());
            de = de.max((fd - d).abs() / scale);
            // ΔU = (r² U')' / r².
            let flux = |s: T| s * s * (self.deriv)(s);
            let lap = (flux(r + h) - flux(r - h)) / ((h + h) * r * r);
            let rho = (self.density)(r) * T::four_pi();
            let lscale = rho.abs().max(d.abs() / r).max(T::min_positive_value());
            dr = dr.max((lap - rho).abs() / lscale);
        }
        ConsistencyReport {
            max_deriv_error: de,
            max_density_error: dr,
        }
    }

    fn val(&self, r: T) -> T {
        (self.value)(r)
    }

    /// Sign conditions of a physical external potential checked at sample
    /// radii: non-positive, nondecreasing, subharmonic.
    pub fn sign_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..16 {
            let x = T::lit(-2.0) + T::lit(4.0) * T::from_usize_lossy(i) / T::lit(15.0);
            let r = self.scale * T::lit(10.0).powf(x);
            if self.val(r) > T::zero() {
                out.push(format!("U_ext({r}) > 0"));
            }
            if (self.deriv)(r) < T::zero() {
                out.push(format!("U_ext'({r}) < 0"));
            }
            if (self.density)(r) < T::zero() {
                out.push(format!("rho_ext({r}) < 0"));
            }
        }
        out
    }
}

fn positive<T: Real>(what: &str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive, got {x}")))
    }
}

impl<T: Real> RadialPotential<T> for ExternalPotential<T> {
    fn value(&self, r: T) -> T {
        (self.value)(r)
    }

    fn deriv(&self, r: T) -> T {
        (self.deriv)(r)
    }

    fn density(&self, r: T) -> T {
        (self.density)(r)
    }

    fn escape_value(&self) -> T {
        self.escape
    }

    fn length_scale(&self) -> T {
        self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_profiles_are_consistent() {
        for p in [
            ExternalPotential::<f64>::plummer(1.0, 0.5).unwrap(),
            ExternalPotential::isochrone(2.0, 1.5).unwrap(),
            ExternalPotential::kepler(1.0).unwrap(),
            ExternalPotential::harmonic(1.3, 2.0).unwrap(),
        ] {
            let c = p.consistency();
            assert!(c.max_deriv_error < 1e-7, "{} {:?}", p.name(), c);
            assert!(c.max_density_error < 1e-6, "{} {:?}", p.name(), c);
        }
    }

    #[test]
    fn inconsistent_closures_rejected() {
        let e = ExternalPotential::<f64>::new("bad", |r| -1.0 / (1.0 + r), |_| 1.0, |_| 0.0, 1.0);
        assert!(e.is_err());
        let ok = ExternalPotential::<f64>::new(
            "plummer-like",
            |r: f64| -1.0 / (1.0 + r * r).sqrt(),
            |r: f64| r / (1.0 + r * r).powf(1.5),
            |r: f64| 3.0 / (4.0 * std::f64::consts::PI) / (1.0 + r * r).powf(2.5),
            1.0,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn second_derivative_from_poisson() {
        let p = ExternalPotential::<f64>::plummer(1.0, 1.0).unwrap();
        for r in [0.0f64, 0.3, 1.0, 4.0] {
            // U'' = (1 - 2 r²)/(1 + r²)^{5/2}
            let exact = (1.0 - 2.0 * r * r) / (1.0 + r * r).powf(2.5);
            assert!((p.second_deriv(r) - exact).abs() < 1e-13);
        }
        assert!(p.sign_violations().is_empty());
    }
}
