//! Piecewise Hermite interpolation on tabulated data with known derivatives.

use crate::scalar::Real;

/// Cubic Hermite value and derivative on one segment, `t ∈ [0, 1]`.
#[inline]
pub fn cubic_hermite<T: Real>(t: T, h: T, y0: T, d0: T, y1: T, d1: T) -> (T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = two * t3 - three * t2 + one;
    let h10 = t3 - two * t2 + t;
    let h01 = -two * t3 + three * t2;
    let h11 = t3 - t2;
    let v = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = six * t2 - six * t;
    let dh10 = three * t2 - T::lit(4.0) * t + one;
    let dh01 = -six * t2 + six * t;
    let dh11 = three * t2 - two * t;
    let dv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
    (v, dv)
}

/// Quintic Hermite value and first derivative on one segment from values,
/// first and second derivatives at both ends.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn quintic_hermite<T: Real>(t: T, h: T, y0: T, d0: T, s0: T, y1: T, d1: T, s1: T) -> (T, T) {
    let l = |x: f64| T::lit(x);
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = T::one() - l(10.0) * t3 + l(15.0) * t4 - l(6.0) * t5;
    let h1 = t - l(6.0) * t3 + l(8.0) * t4 - l(3.0) * t5;
    let h2 = (t2 - l(3.0) * t3 + l(3.0) * t4 - t5) * l(0.5);
    let h3 = l(10.0) * t3 - l(15.0) * t4 + l(6.0) * t5;
    let h4 = -l(4.0) * t3 + l(7.0) * t4 - l(3.0) * t5;
    let h5 = (t3 - l(2.0) * t4 + t5) * l(0.5);
    let v = h0 * y0 + h * h1 * d0 + h * h * h2 * s0 + h3 * y1 + h * h4 * d1 + h * h * h5 * s1;
    let g0 = -l(30.0) * t2 + l(60.0) * t3 - l(30.0) * t4;
    let g1 = T::one() - l(18.0) * t2 + l(32.0) * t3 - l(15.0) * t4;
    let g2 = (l(2.0) * t - l(9.0) * t2 + l(12.0) * t3 - l(5.0) * t4) * l(0.5);
    let g3 = -g0;
    let g4 = -l(12.0) * t2 + l(28.0) * t3 - l(15.0) * t4;
    let g5 = (l(3.0) * t2 - l(8.0) * t3 + l(5.0) * t4) * l(0.5);
    let dv = (g0 * y0 + g3 * y1) / h + g1 * d0 + h * g2 * s0 + g4 * d1 + h * g5 * s1;
    (v, dv)
}

/// Index `i` with `xs[i] <= x <= xs[i + 1]`, clamped to the table.
#[inline]
pub fn segment_index<T: Real>(xs: &[T], x: T) -> usize {
    debug_assert!(xs.len() >= 2);
    let n = xs.len();
    if x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    match xs.binary_search_by(|p| p.partial_cmp(&x).expect("finite abscissae")) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_reproduces_quintic_polynomial() {
        let f = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x.powi(3) - x.powi(4) + 0.3 * x.powi(5);
        let df = |x: f64| 1.0 - 4.0 * x + 1.5 * x * x - 4.0 * x.powi(3) + 1.5 * x.powi(4);
        let d2f = |x: f64| -4.0 + 3.0 * x - 12.0 * x * x + 6.0 * x.powi(3);
        let (a, b) = (0.3, 1.1);
        for k in 0..=10 {
            let x = a + (b - a) * k as f64 / 10.0;
            let t = (x - a) / (b - a);
            let (v, dv) = quintic_hermite(t, b - a, f(a), df(a), d2f(a), f(b), df(b), d2f(b));
            assert!((v - f(x)).abs() < 1e-13);
            assert!((dv - df(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_reproduces_cubic() {
        let f = |x: f64| 2.0 - x + 3.0 * x.powi(3);
        let df = |x: f64| -1.0 + 9.0 * x * x;
        let (v, dv) = cubic_hermite(0.25, 2.0, f(1.0), df(1.0), f(3.0), df(3.0));
        assert!((v - f(1.5)).abs() < 1e-12);
        assert!((dv - df(1.5)).abs() < 1e-12);
    }

    #[test]
    fn segments() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(segment_index(&xs, -1.0), 0);
        assert_eq!(segment_index(&xs, 1.0), 1);
        assert_eq!(segment_index(&xs, 1.5), 1);
        assert_eq!(segment_index(&xs, 3.0), 2);
        assert_eq!(segment_index(&xs, 9.0), 2);
    }
}
