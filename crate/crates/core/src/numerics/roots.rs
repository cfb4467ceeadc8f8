use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootResult<T> {
    pub x: T,
    pub residual: T,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 400;

/// Bracketed root of `f` on `[lo, hi]`: secant steps safeguarded by
/// bisection whenever the bracket fails to halve over two iterations.
///
/// Terminates when `|f(x)| <= tol`, when the bracket is narrower than
/// `tol·max(1, |x|)`, or when the bracket cannot be split further in the
/// working precision. Pass a tiny `tol` to get a root to full precision.
pub fn find_root<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> Result<RootResult<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("root tolerance must be positive, got {tol}")));
    }
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(RootResult { x: a, residual: fa, iterations: 0 });
    }
    if fb == T::zero() {
        return Ok(RootResult { x: b, residual: fb, iterations: 0 });
    }
    if !(fa * fb < T::zero()) || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NotBracketed {
            lo: a.to_f64_lossy(),
            hi: b.to_f64_lossy(),
            f_lo: fa.to_f64_lossy(),
            f_hi: fb.to_f64_lossy(),
        });
    }
    let half = T::lit(0.5);
    let mut width_two_ago = (b - a) * T::lit(4.0);
    let mut width_prev = (b - a) * T::lit(2.0);
    for it in 1..=MAX_ITERATIONS {
        let width = b - a;
        let best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
        if best.1.abs() <= tol || width <= tol * T::one().max(best.0.abs()) {
            return Ok(RootResult { x: best.0, residual: best.1, iterations: it - 1 });
        }
        let mid = a + width * half;
        if !(a < mid && mid < b) {
            return Ok(RootResult { x: best.0, residual: best.1, iterations: it - 1 });
        }
        let secant = b - fb * (b - a) / (fb - fa);
        let stalled = width > width_two_ago * half;
        let x = if !stalled && secant > a && secant < b && secant.is_finite() {
            secant
        } else {
            mid
        };
        let fx = f(x);
        if fx == T::zero() {
            return Ok(RootResult { x, residual: fx, iterations: it });
        }
        if !fx.is_finite() {
            return Err(Error::IntegrandNotFinite { x: x.to_f64_lossy() });
        }
        if (fx < T::zero()) == (fa < T::zero()) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        width_two_ago = width_prev;
        width_prev = width;
    }
    Err(Error::RootNoConvergence { iterations: MAX_ITERATIONS })
}

/// Root to full working precision.
pub fn find_root_precise<T: Real, F: FnMut(T) -> T>(f: F, lo: T, hi: T) -> Result<RootResult<T>> {
    find_root(f, lo, hi, T::min_positive_value())
}

/// Golden-section minimisation of a unimodal `f` on `[a, b]`.
pub fn golden_section_min<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // Endpoints are candidates too: the minimum of a monotone function
    // sits on the boundary.
    let mut best = if fc < fd { (c, fc) } else { (d, fd) };
    for x in [a, b] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = find_root(|x: f64| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.residual.abs() <= 1e-12 || r.iterations > 0);
    }

    #[test]
    fn identity_and_cosine() {
        let r = find_root(|x: f64| x, -1.0, 1.0, 1e-14).unwrap();
        assert!(r.x.abs() < 1e-14);
        let r = find_root(|x: f64| x.cos(), 1.0, 2.0, 1e-14).unwrap();
        assert!((r.x - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn precise_root_hits_machine_precision() {
        let r = find_root_precise(|x: f64| x.exp() - 3.0, 0.0, 5.0).unwrap();
        assert!((r.x - 3f64.ln()).abs() < 4e-16);
        assert!(r.iterations < 120);
    }

    #[test]
    fn not_bracketed() {
        let e = find_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(e, Error::NotBracketed { .. }));
    }

    #[test]
    fn golden_section_interior_and_boundary() {
        let (x, _) = golden_section_min(|x: f64| (x - 0.3).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        let (x, _) = golden_section_min(|x: f64| -x, 0.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
    }
}
