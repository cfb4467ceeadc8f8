use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::interp::quintic_hermite;
use crate::numerics::ode::{integrate_radial_ode, OdeConfig};
use crate::potential::{ExternalPotential, RadialPotential};
use crate::scalar::Real;
use crate::steady_state::df::DistributionFunction;

pub const DEFAULT_GRID_NODES: usize = 2000;

#[derive(Debug, Clone, Copy)]
pub struct SolveConfig<T> {
    /// Radial nodes on `[0, R0]`, clustered at both ends.
    pub grid_nodes: usize,
    /// Give up if the depth has not reached zero by this radius.
    pub r_max: T,
    pub ode: OdeConfig<T>,
}

impl<T: Real> Default for SolveConfig<T> {
    fn default() -> Self {
        Self {
            grid_nodes: DEFAULT_GRID_NODES,
            r_max: T::lit(1e4),
            ode: OdeConfig::default(),
        }
    }
}

/// Scalar summary of a solved state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateHeader<T> {
    pub n: Option<T>,
    pub amplitude: T,
    pub y_central: T,
    #[serde(rename = "E0")]
    pub e0: T,
    #[serde(rename = "R0")]
    pub r0: T,
    #[serde(rename = "U0")]
    pub u0: T,
    #[serde(rename = "M")]
    pub mass: T,
}

/// Self-consistent equilibrium: `U = U_self + U_ext` with
/// `ΔU_self = 4πΦ(U)`, tabulated on `[0, R0]` and continued analytically
/// outside.
#[derive(Debug, Clone)]
pub struct SteadyState<T> {
    df: DistributionFunction<T>,
    ext: Option<ExternalPotential<T>>,
    y_central: T,
    e0: T,
    r0: T,
    u0: T,
    mass: T,
    r: Vec<T>,
    u: Vec<T>,
    du: Vec<T>,
    d2u: Vec<T>,
    rho: Vec<T>,
}

/// Integrates the depth equation `y'' + (2/r) y' = -4π Φ(E0 - y) - 4π ρ_ext`
/// outward from `y(0) = y_central` to its first zero `R0`, then fixes the
/// cutoff by matching to the exterior `-M/r + U_ext`.
///
/// With `y = E0 - U` and `ΔU_ext = 4πρ_ext`, the external density enters
/// with the same sign as the self-consistent one.
pub fn solve_equilibrium<T: Real>(
    df: &DistributionFunction<T>,
    ext: Option<&ExternalPotential<T>>,
    y_central: T,
    cfg: &SolveConfig<T>,
) -> Result<SteadyState<T>> {
    if !(y_central > T::zero() && y_central.is_finite()) {
        return Err(Error::InvalidParameter(format!("central depth must be positive, got {y_central}")));
    }
    if cfg.grid_nodes < 8 {
        return Err(Error::InvalidParameter(format!("radial grid needs at least 8 nodes, got {}", cfg.grid_nodes)));
    }
    if let Some(top) = df.max_depth() {
        if y_central > top * (T::one() + T::tight_tol()) {
            return Err(Error::TableUnderresolved {
                depth: y_central.to_f64_lossy(),
                covered: top.to_f64_lossy(),
            });
        }
    }
    let four_pi = T::four_pi();
    let rho_ext = |r: T| ext.map_or(T::zero(), |e| e.density(r));
    let profile = |y: T| df.profile_of_depth(y.max(T::zero()));
    // Surface profile errors through a side channel: the ODE right-hand side is infallible.
    let failure = std::cell::RefCell::new(None);
    let source = |r: T, y: T| match profile(y) {
        Ok(p) => -four_pi * (p + rho_ext(r)),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            T::nan()
        }
    };
    let traj = integrate_radial_ode(source, y_central, T::zero(), cfg.r_max, |_r, y, _p| y, &cfg.ode);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let traj = traj?;
    let r0 = match traj.event_radius() {
        Some(r0) => r0,
        None => {
            let (y_end, _) = traj.eval(traj.r_end());
            return Err(Error::UnboundedSupport {
                r_max: cfg.r_max.to_f64_lossy(),
                depth: y_end.to_f64_lossy(),
            });
        }
    };
    let (_, yp_r0) = traj.eval(r0);
    let (u_ext_r0, du_ext_r0) = ext.map_or((T::zero(), T::zero()), |e| (e.value(r0), e.deriv(r0)));
    let mass = -r0 * r0 * yp_r0 - r0 * r0 * du_ext_r0;
    let e0 = -mass / r0 + u_ext_r0;
    let u0 = e0 - y_central;

    let n = cfg.grid_nodes;
    let mut r = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    let mut d2u = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    let half = T::lit(0.5);
    for i in 0..n {
        let ri = if i == n - 1 {
            r0
        } else {
            r0 * half * (T::one() - (T::PI() * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)).cos())
        };
        let (y, yp) = if i == n - 1 { (T::zero(), yp_r0) } else { traj.eval(ri) };
        let y = y.max(T::zero());
        let rho_i = df.profile_of_depth(y)?;
        let total = rho_i + rho_ext(ri);
        let upp = if i == 0 {
            four_pi * total / T::lit(3.0)
        } else {
            four_pi * total + T::lit(2.0) * yp / ri
        };
        r.push(ri);
        u.push(e0 - y);
        du.push(-yp);
        d2u.push(upp);
        rho.push(rho_i);
    }
    Ok(SteadyState {
        df: df.with_cutoff(e0),
        ext: ext.cloned(),
        y_central,
        e0,
        r0,
        u0,
        mass,
        r,
        u,
        du,
        d2u,
        rho,
    })
}

impl<T: Real> SteadyState<T> {
    /// Distribution function anchored at the solved cutoff `E0`.
    pub fn df(&self) -> &DistributionFunction<T> {
        &self.df
    }

    pub fn external(&self) -> Option<&ExternalPotential<T>> {
        self.ext.as_ref()
    }

    pub fn e0(&self) -> T {
        self.e0
    }

    pub fn r0(&self) -> T {
        self.r0
    }

    pub fn u0(&self) -> T {
        self.u0
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn y_central(&self) -> T {
        self.y_central
    }

    pub fn radii(&self) -> &[T] {
        &self.r
    }

    pub fn potential_table(&self) -> &[T] {
        &self.u
    }

    pub fn force_table(&self) -> &[T] {
        &self.du
    }

    pub fn density_table(&self) -> &[T] {
        &self.rho
    }

    pub fn header(&self) -> StateHeader<T> {
        StateHeader {
            n: self.df.exponent(),
            amplitude: self.df.amplitude(),
            y_central: self.y_central,
            e0: self.e0,
            r0: self.r0,
            u0: self.u0,
            mass: self.mass,
        }
    }

    fn segment(&self, r: T) -> usize {
        // Invert the cosine clustering, then correct by one node if rounding
        // put us in a neighbour.
        let n = self.r.len();
        let x = (T::one() - T::lit(2.0) * r / self.r0).max(-T::one()).min(T::one());
        let guess = (x.acos() / T::PI() * T::from_usize_lossy(n - 1)).floor();
        let mut i = guess.to_usize().unwrap_or(0).min(n - 2);
        while i > 0 && self.r[i] > r {
            i -= 1;
        }
        while i < n - 2 && self.r[i + 1] < r {
            i += 1;
        }
        i
    }

    fn interior(&self, r: T) -> (T, T) {
        let i = self.segment(r);
        let h = self.r[i + 1] - self.r[i];
        let t = (r - self.r[i]) / h;
        quintic_hermite(
            t,
            h,
            self.u[i],
            self.du[i],
            self.d2u[i],
            self.u[i + 1],
            self.du[i + 1],
            self.d2u[i + 1],
        )
    }

    /// `(U, U', ρ0)` at radius `r`.
    pub fn eval_state(&self, r: T) -> Result<(T, T, T)> {
        if r < T::zero() || r.is_nan() {
            return Err(Error::NegativeRadius { r: r.to_f64_lossy() });
        }
        Ok((self.value(r), self.deriv(r), self.rho0(r)))
    }

    /// Self-consistent mass density `Φ(U(r))`, zero outside `R0`.
    pub fn rho0(&self, r: T) -> T {
        if r >= self.r0 {
            return T::zero();
        }
        let (u, _) = self.interior(r);
        self.df.profile_of_depth(self.e0 - u).unwrap_or(T::zero())
    }

    /// Depth `E0 - U(r)`, clamped at zero.
    pub fn depth(&self, r: T) -> T {
        (self.e0 - self.value(r)).max(T::zero())
    }

    /// Copy with `φ` multiplied by `s` and `U` left unchanged. The result
    /// is no longer self-consistent; it isolates linearity in `φ`.
    pub fn with_frozen_potential(&self, s: T) -> Self {
        let mut out = self.clone();
        out.df = self.df.scaled(s);
        out
    }

    /// Radius where `U(r) = e` for `U0 ≤ e ≤ E0`.
    pub fn radius_of_potential(&self, e: T) -> T {
        if e <= self.u0 {
            return T::zero();
        }
        if e >= self.e0 {
            return self.r0;
        }
        let k = self.u.partition_point(|&v| v < e).clamp(1, self.u.len() - 1);
        let (mut lo, mut hi) = (self.r[k - 1], self.r[k]);
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if !(lo < mid && mid < hi) {
                break;
            }
            if self.interior(mid).0 < e {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) * T::lit(0.5)
    }
}

impl<T: Real> RadialPotential<T> for SteadyState<T> {
    fn value(&self, r: T) -> T {
        if r <= self.r0 {
            self.interior(r).0
        } else {
            -self.mass / r + self.ext.as_ref().map_or(T::zero(), |e| e.value(r))
        }
    }

    fn deriv(&self, r: T) -> T {
        if r <= self.r0 {
            self.interior(r).1
        } else {
            self.mass / (r * r) + self.ext.as_ref().map_or(T::zero(), |e| e.deriv(r))
        }
    }

    fn density(&self, r: T) -> T {
        self.rho0(r) + self.ext.as_ref().map_or(T::zero(), |e| e.density(r))
    }

    fn central_value(&self) -> T {
        self.u0
    }

    fn length_scale(&self) -> T {
        self.r0
    }
}
