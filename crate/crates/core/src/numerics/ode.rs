//! Adaptive Dormand–Prince 5(4) integration of the radial equation
//! `y'' + (2/r) y' = S(r, y)` with regular start at the origin.

use crate::error::{Error, Result};
use crate::numerics::interp::{quintic_hermite, segment_index};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct OdeConfig<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeConfig<T> {
    fn default() -> Self {
        let rtol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        Self {
            rtol,
            atol: rtol * T::lit(1e-2),
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Knot<T> {
    r: T,
    y: T,
    p: T,
    ypp: T,
}

/// Dense trajectory: series start on `[0, r_start]`, then quintic Hermite
/// segments between accepted steps.
#[derive(Debug, Clone)]
pub struct RadialTrajectory<T> {
    y0: T,
    s0: T,
    knots: Vec<Knot<T>>,
    radii: Vec<T>,
    r_end: T,
    event: Option<T>,
}

impl<T: Real> RadialTrajectory<T> {
    /// `(y, y')` at radius `r`, clamped to `[0, r_end]`.
    pub fn eval(&self, r: T) -> (T, T) {
        let r = r.max(T::zero()).min(self.r_end);
        let r_start = self.radii[0];
        if r <= r_start {
            let third = T::one() / T::lit(3.0);
            return (self.y0 + self.s0 * r * r / T::lit(6.0), self.s0 * r * third);
        }
        let i = segment_index(&self.radii, r);
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        let h = b.r - a.r;
        quintic_hermite((r - a.r) / h, h, a.y, a.p, a.ypp, b.y, b.p, b.ypp)
    }

    /// Radius of the detected event, if any.
    pub fn event_radius(&self) -> Option<T> {
        self.event
    }

    pub fn r_end(&self) -> T {
        self.r_end
    }

    /// Number of accepted steps.
    pub fn steps(&self) -> usize {
        self.knots.len() - 1
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y'' + (2/r) y' = source(r, y)` outward from `y(0) = y0`,
/// `y'(0) = yp0` (must be zero for a regular solution) until `r_max` or
/// until `event(r, y, y')` changes sign from positive to non-positive.
///
/// The event radius is located by bisection on the dense output.
pub fn integrate_radial_ode<T, S, G>(
    source: S,
    y0: T,
    yp0: T,
    r_max: T,
    event: G,
    cfg: &OdeConfig<T>,
) -> Result<RadialTrajectory<T>>
where
    T: Real,
    S: Fn(T, T) -> T,
    G: Fn(T, T, T) -> T,
{
    if yp0 != T::zero() {
        return Err(Error::InvalidParameter(
            "radial ODE needs y'(0) = 0 for a solution regular at the origin".into(),
        ));
    }
    if !(r_max > T::zero()) {
        return Err(Error::EmptyInterval {
            a: 0.0,
            b: r_max.to_f64_lossy(),
        });
    }
    let s0 = source(T::zero(), y0);
    if !s0.is_finite() || !y0.is_finite() {
        return Err(Error::StiffOrSingular { r: 0.0 });
    }
    let scale = if s0 != T::zero() && y0 != T::zero() {
        (y0 / s0).abs().sqrt().min(r_max)
    } else {
        r_max
    };
    let r_start = scale * T::lit(1e-5);
    let third = T::one() / T::lit(3.0);
    let mut r = r_start;
    let mut y = y0 + s0 * r * r / T::lit(6.0);
    let mut p = s0 * r * third;
    let accel = |r: T, y: T, p: T| source(r, y) - T::lit(2.0) * p / r;
    let mut knots = vec![Knot { r, y, p, ypp: accel(r, y, p) }];
    let mut h = r_start;
    let mut g_prev = event(r, y, p);
    let mut event_r = None;

    let lit = |x: f64| T::lit(x);
    for _ in 0..cfg.max_steps {
        if r >= r_max {
            break;
        }
        h = h.min(r_max - r);
        let mut ky = [T::zero(); 7];
        let mut kp = [T::zero(); 7];
        for s in 0..7 {
            let mut yy = y;
            let mut pp = p;
            for j in 0..s {
                yy = yy + h * lit(A[s][j]) * ky[j];
                pp = pp + h * lit(A[s][j]) * kp[j];
            }
            let rr = r + lit(C[s]) * h;
            ky[s] = pp;
            kp[s] = accel(rr, yy, pp);
        }
        let mut y_new = y;
        let mut p_new = p;
        let mut ey = T::zero();
        let mut ep = T::zero();
        // The last stage is evaluated at the 5th-order solution (FSAL).
        for s in 0..6 {
            y_new = y_new + h * lit(A[6][s]) * ky[s];
            p_new = p_new + h * lit(A[6][s]) * kp[s];
        }
        for s in 0..7 {
            ey = ey + h * lit(E[s]) * ky[s];
            ep = ep + h * lit(E[s]) * kp[s];
        }
        let sy = cfg.atol + cfg.rtol * y.abs().max(y_new.abs());
        let sp = cfg.atol + cfg.rtol * p.abs().max(p_new.abs());
        let err = (((ey / sy).powi(2) + (ep / sp).powi(2)) * lit(0.5)).sqrt();
        if !err.is_finite() {
            h = h * lit(0.2);
        } else if err <= T::one() {
            let r_new = r + h;
            let knot = Knot {
                r: r_new,
                y: y_new,
                p: p_new,
                ypp: kp[6],
            };
            knots.push(knot);
            r = r_new;
            y = y_new;
            p = p_new;
            let g = event(r, y, p);
            let factor = if err == T::zero() {
                lit(5.0)
            } else {
                (lit(0.9) * err.powf(lit(-0.2))).min(lit(5.0)).max(lit(0.2))
            };
            h = h * factor;
            if g_prev > T::zero() && g <= T::zero() {
                event_r = Some(r);
                break;
            }
            g_prev = g;
            continue;
        } else {
            h = h * (lit(0.9) * err.powf(lit(-0.2))).max(lit(0.2));
        }
        if h <= r * T::epsilon() * lit(16.0) {
            return Err(Error::StiffOrSingular { r: r.to_f64_lossy() });
        }
    }

    let radii: Vec<T> = knots.iter().map(|k| k.r).collect();
    let mut traj = RadialTrajectory {
        y0,
        s0,
        knots,
        radii,
        r_end: r,
        event: None,
    };
    if event_r.is_some() {
        let n = traj.knots.len();
        let mut lo = traj.knots[n - 2].r;
        let mut hi = traj.knots[n - 1].r;
        for _ in 0..200 {
            let mid = lo + (hi - lo) * lit(0.5);
            if !(lo < mid && mid < hi) {
                break;
            }
            let (ym, pm) = traj.eval(mid);
            if event(mid, ym, pm) > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        traj.event = Some(hi);
        traj.r_end = hi;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lane_emden_index_one() {
        let t = integrate_radial_ode(|_r, y: f64| -y, 1.0, 0.0, 10.0, |_r, y, _p| y, &OdeConfig::default()).unwrap();
        let r0 = t.event_radius().unwrap();
        assert!((r0 - PI).abs() < 1e-10, "{r0}");
        let (y, _) = t.eval(PI);
        assert!(y.abs() < 1e-8);
        for k in 1..50 {
            let r = PI * k as f64 / 50.0;
            let (y, p) = t.eval(r);
            assert!((y - r.sin() / r).abs() < 1e-10);
            assert!((p - (r * r.cos() - r.sin()) / (r * r)).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_and_quadratic() {
        let t = integrate_radial_ode(|_r, _y: f64| 0.0, 0.7, 0.0, 3.0, |_, _, _| 1.0, &OdeConfig::default()).unwrap();
        assert!(t.event_radius().is_none());
        assert!((t.eval(2.5).0 - 0.7).abs() < 1e-15);
        let t = integrate_radial_ode(|_r, _y: f64| -6.0, 1.0, 0.0, 2.0, |_, y, _| y, &OdeConfig::default()).unwrap();
        assert!((t.event_radius().unwrap() - 1.0).abs() < 1e-12);
        for r in [0.0, 1e-7, 0.2, 0.5, 0.9] {
            assert!((t.eval(r).0 - (1.0 - r * r)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_irregular_start() {
        assert!(integrate_radial_ode(|_r, y: f64| -y, 1.0, 0.5, 1.0, |_, _, _| 1.0, &OdeConfig::default()).is_err());
    }

    #[test]
    fn singular_source_reports_underflow() {
        let e = integrate_radial_ode(
            |r: f64, _y: f64| if r > 0.5 { 1.0 / (0.6 - r).abs().powi(3) } else { 0.0 },
            1.0,
            0.0,
            1.0,
            |_, _, _| 1.0,
            &OdeConfig::default(),
        );
        assert!(e.is_err());
    }
}
