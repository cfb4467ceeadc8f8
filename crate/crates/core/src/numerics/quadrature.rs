//! Gauss–Legendre and Gauss–Kronrod quadrature, plus the endpoint
//! substitutions used for turning-point integrals.
//!
//! Integrands of the form `g(x) / sqrt((x - a)(b - x))` with smooth `g`
//! become smooth after `x = a + (b - a) sin²(u)`, so a fixed-order
//! Gauss–Legendre rule converges spectrally on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default node count for turning-point integrals.
pub const DEFAULT_ORDER: usize = 64;

/// Gauss–Legendre rule on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// Builds the `n`-point Gauss–Legendre rule by Newton iteration on
    /// `P_n`. Nodes are returned in increasing order.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be positive");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = T::from_usize_lossy(n);
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi initial guess, refined by Newton.
            let mut x = (T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != T::zero() {
                dp = d;
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Plain Gauss–Legendre sum over `[a, b]`; non-finite samples are errors.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> Result<T> {
        let mut acc = T::zero();
        for (x, w) in self.mapped(a, b) {
            let fx = f(x);
            if !fx.is_finite() {
                return Err(Error::IntegrandNotFinite { x: x.to_f64_lossy() });
            }
            acc = acc + w * fx;
        }
        Ok(acc)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize_lossy(n);
    let dp = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// Which ends of the interval carry an inverse-square-root singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularEnds {
    None,
    Left,
    Right,
    Both,
}

/// Integrates `f` over `[a, b]` with the default 64-point rule, removing
/// inverse-square-root endpoint singularities by substitution.
pub fn integrate_singular<T: Real, F: FnMut(T) -> T>(
    f: F,
    a: T,
    b: T,
    sing: SingularEnds,
) -> Result<T> {
    let rule = QuadratureRule::gauss_legendre(DEFAULT_ORDER);
    integrate_singular_with(&rule, f, a, b, sing)
}

/// As [`integrate_singular`] with an explicit rule.
///
/// * `Both`: `x = a + (b - a) sin²(u)`, `u ∈ (0, π/2)`.
/// * `Left`: `x = a + (b - a) s²`; `Right`: `x = b - (b - a) s²`, `s ∈ (0, 1)`.
pub fn integrate_singular_with<T: Real, F: FnMut(T) -> T>(
    rule: &QuadratureRule<T>,
    mut f: F,
    a: T,
    b: T,
    sing: SingularEnds,
) -> Result<T> {
    if !(a < b) {
        return Err(Error::EmptyInterval {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
        });
    }
    let w = b - a;
    let two = T::lit(2.0);
    match sing {
        SingularEnds::None => rule.integrate(f, a, b),
        SingularEnds::Both => rule.integrate(
            |u| {
                let (s, c) = u.sin_cos();
                f(a + w * s * s) * two * w * s * c
            },
            T::zero(),
            T::FRAC_PI_2(),
        ),
        SingularEnds::Left => rule.integrate(|s| f(a + w * s * s) * two * w * s, T::zero(), T::one()),
        SingularEnds::Right => rule.integrate(|s| f(b - w * s * s) * two * w * s, T::zero(), T::one()),
    }
}

/// Endpoint at which [`integrate_graded`] clusters nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradedEnd {
    Left,
    Right,
}

/// Integrates with the power grading `x = b - (b - a) s^m` (right end) or
/// `x = a + (b - a) s^m` (left end). An integrable endpoint behaviour
/// `|x - end|^q` becomes `s^{m(q + 1) - 1}`, smooth for `m = 1/(q + 1)`.
///
/// The integrand receives `(x, |x - end|)`; the distance is computed
/// without cancellation.
pub fn integrate_graded<T: Real, F: FnMut(T, T) -> T>(
    rule: &QuadratureRule<T>,
    mut f: F,
    a: T,
    b: T,
    end: GradedEnd,
    m: T,
) -> Result<T> {
    if !(a < b) {
        return Err(Error::EmptyInterval {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
        });
    }
    let w = b - a;
    rule.integrate(
        |s| {
            let sm1 = s.powf(m - T::one());
            let jac = m * w * sm1;
            let dist = w * s * sm1;
            let x = match end {
                GradedEnd::Right => b - dist,
                GradedEnd::Left => a + dist,
            };
            f(x, dist) * jac
        },
        T::zero(),
        T::one(),
    )
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

// Published 15-point Kronrod nodes and weights, quoted in full.
#[allow(clippy::excessive_precision)]
const GK_XK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
#[allow(clippy::excessive_precision)]
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
#[allow(clippy::excessive_precision)]
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Result<(T, T)> {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut kron = T::zero();
    let mut gauss = T::zero();
    let eval = |x: T, f: &mut F| -> Result<T> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::IntegrandNotFinite { x: x.to_f64_lossy() })
        }
    };
    let fc = eval(mid, f)?;
    kron = kron + T::lit(GK_WK[7]) * fc;
    gauss = gauss + T::lit(GK_WG[3]) * fc;
    for j in 0..7 {
        let dx = half * T::lit(GK_XK[j]);
        let s = eval(mid - dx, f)? + eval(mid + dx, f)?;
        kron = kron + T::lit(GK_WK[j]) * s;
        if j % 2 == 1 {
            gauss = gauss + T::lit(GK_WG[j / 2]) * s;
        }
    }
    Ok((kron * half, ((kron - gauss) * half).abs()))
}

/// Globally adaptive Gauss–Kronrod (7/15) integration.
///
/// Stops when the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|)` or after `max_intervals` bisections; the
/// `converged` flag records which.
pub fn integrate_adaptive<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_intervals: usize,
) -> Result<Adaptive<T>> {
    if !(a < b) {
        return Err(Error::EmptyInterval {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
        });
    }
    let (v0, e0) = gk15(&mut f, a, b)?;
    let mut intervals = vec![(a, b, v0, e0)];
    let mut evaluations = 15;
    loop {
        let total: T = intervals.iter().map(|iv| iv.2).sum();
        let err: T = intervals.iter().map(|iv| iv.3).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target {
            return Ok(Adaptive {
                value: total,
                error: err,
                evaluations,
                converged: true,
            });
        }
        if intervals.len() >= max_intervals {
            return Ok(Adaptive {
                value: total,
                error: err,
                evaluations,
                converged: false,
            });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, iv)| {
                if iv.3 > best.1 {
                    (i, iv.3)
                } else {
                    best
                }
            });
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let m = (lo + hi) * T::lit(0.5);
        if !(lo < m && m < hi) {
            // Interval cannot be split further in this precision.
            let total: T = intervals.iter().map(|iv| iv.2).sum();
            return Ok(Adaptive {
                value: total,
                error: err,
                evaluations,
                converged: false,
            });
        }
        let (vl, el) = gk15(&mut f, lo, m)?;
        let (vr, er) = gk15(&mut f, m, hi)?;
        evaluations += 30;
        intervals.push((lo, m, vl, el));
        intervals.push((m, hi, vr, er));
    }
}
