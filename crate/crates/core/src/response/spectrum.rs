use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::sym_eig;
use crate::response::basis::{build_basis, BasisFamily};
use crate::response::frequency::{build_frequency_map, essential_bands, EssentialSpectrum, OrbitalFrequency};
use crate::response::kernel::{prepare_response, ResponseKernel, DEFAULT_K_MAX, DEFAULT_MARGIN};
use crate::response::trace::{divergence_diagnostic, kphi_trace_check, trace_bound, DivergenceReport, KphiTraces, TraceBound};
use crate::scalar::Real;
use crate::steady_state::SteadyState;

/// `λ_i = ω*² (1 - 2^{-d i/(P-1)})`, `i = 0..P`: from 0 toward the gap
/// edge, geometrically refined.
pub fn lambda_grid<T: Real>(omega_star: T, points: usize, depth: T) -> Vec<T> {
    let w2 = omega_star * omega_star;
    if points <= 1 {
        return vec![T::zero(); points];
    }
    let last = T::from_usize_lossy(points - 1);
    (0..points)
        .map(|i| w2 * (T::one() - T::lit(2.0).powf(-depth * T::from_usize_lossy(i) / last)))
        .collect()
}

/// Top eigenvalues `ν_1 ≥ ν_2 ≥ …` of `B(λ)` along a `λ` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCurves<T> {
    pub lambdas: Vec<T>,
    /// `values[i][p]` is `ν_{p+1}(λ_i)`.
    pub values: Vec<Vec<T>>,
}

impl<T: Real> EigenCurves<T> {
    pub fn curve(&self, p: usize) -> Vec<T> {
        self.values.iter().map(|v| v[p]).collect()
    }

    pub fn count(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Largest decrease `ν(λ_i) - ν(λ_{i+1})` over all curves; zero when
    /// every curve is nondecreasing.
    pub fn max_decrease(&self) -> T {
        let mut worst = T::zero();
        for p in 0..self.count() {
            let c = self.curve(p);
            for w in c.windows(2) {
                worst = worst.max(w[0] - w[1]);
            }
        }
        worst
    }
}

pub fn eigencurves<T: Real>(kernel: &ResponseKernel<T>, lambdas: &[T], top: usize) -> Result<EigenCurves<T>> {
    let top = top.min(kernel.size());
    let mut values = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let b = kernel.matrix(l, T::lit(DEFAULT_MARGIN))?;
        let eig = sym_eig(&b, None)?;
        values.push(eig.values.into_iter().take(top).collect());
    }
    Ok(EigenCurves {
        lambdas: lambdas.to_vec(),
        values,
    })
}

/// An eigenvalue `λ` of the Antonov operator in the gap, where
/// `ν_i(λ) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode<T> {
    pub curve: usize,
    pub lambda: T,
    pub sqrt_lambda: T,
    /// Galerkin eigenvector over the orthonormal potential-density pairs.
    pub coefficients: Vec<T>,
    /// `|ν_i(λ) - 1|`.
    pub residual: T,
    /// Crossing not bracketed inside the grid: `ν_i ≥ 1` already at the
    /// first grid point.
    pub at_resolution_limit: bool,
}

/// Bisects each curve's first crossing of 1 to `tol · ω*²`.
pub fn locate_modes<T: Real>(kernel: &ResponseKernel<T>, curves: &EigenCurves<T>, tol: T) -> Result<Vec<Mode<T>>> {
    let w2 = kernel.omega_star() * kernel.omega_star();
    let margin = T::lit(DEFAULT_MARGIN);
    let nu = |l: T, p: usize| -> Result<(T, Vec<T>)> {
        let eig = sym_eig(&kernel.matrix(l, margin)?, None)?;
        Ok((eig.values[p], eig.vectors.column(p)))
    };
    let mut modes = Vec::new();
    for p in 0..curves.count() {
        let c = curves.curve(p);
        if c[0] >= T::one() {
            let (v, vec) = nu(curves.lambdas[0], p)?;
            modes.push(Mode {
                curve: p,
                lambda: curves.lambdas[0],
                sqrt_lambda: curves.lambdas[0].sqrt(),
                coefficients: vec,
                residual: (v - T::one()).abs(),
                at_resolution_limit: true,
            });
            continue;
        }
        let Some(i) = c.windows(2).position(|w| w[0] < T::one() && w[1] >= T::one()) else {
            continue;
        };
        let (mut lo, mut hi) = (curves.lambdas[i], curves.lambdas[i + 1]);
        while hi - lo > tol * w2 {
            let mid = lo + (hi - lo) * T::lit(0.5);
            if nu(mid, p)?.0 >= T::one() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lambda = lo + (hi - lo) * T::lit(0.5);
        let (v, vec) = nu(lambda, p)?;
        modes.push(Mode {
            curve: p,
            lambda,
            sqrt_lambda: lambda.sqrt(),
            coefficients: vec,
            residual: (v - T::one()).abs(),
            at_resolution_limit: false,
        });
    }
    Ok(modes)
}

/// Parameters of a full spectral analysis of a solved state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig<T> {
    pub n_e: usize,
    pub n_l: usize,
    pub k_max: usize,
    pub basis_size: usize,
    pub family: BasisFamily,
    pub lambda_points: usize,
    pub lambda_depth: T,
    pub curves: usize,
    /// `ε` of the divergence diagnostic, relative to `R0`.
    pub epsilon: T,
    pub diagnostic_resolution: usize,
    /// Width of the final bisection bracket of a mode, relative to `ω*²`.
    pub mode_tolerance: T,
}

impl<T: Real> Default for SpectralConfig<T> {
    fn default() -> Self {
        Self {
            n_e: 24,
            n_l: 24,
            k_max: DEFAULT_K_MAX,
            basis_size: 12,
            family: BasisFamily::Legendre,
            lambda_points: 32,
            lambda_depth: T::lit(12.0),
            curves: 4,
            epsilon: T::lit(1e-3),
            diagnostic_resolution: 64,
            mode_tolerance: T::lit(1e-8),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDiagnostics<T> {
    pub divergence: DivergenceReport<T>,
    pub kphi_traces: KphiTraces<T>,
    /// Estimated trace of the neglected harmonics `k > k_max` at the last
    /// grid point.
    pub tail_estimate: T,
    pub d_omega_d_e_corner: T,
    pub argmin_at_corner: bool,
}

/// Everything the analysis produces about the gap `(0, ω*²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport<T> {
    pub omega_star: T,
    pub omega_max: T,
    pub argmin: (T, T),
    pub on_circular: bool,
    pub spectrum: EssentialSpectrum<T>,
    pub trace_bound: TraceBound<T>,
    pub eigencurves: EigenCurves<T>,
    pub modes: Vec<Mode<T>>,
    pub diagnostics: SpectralDiagnostics<T>,
}

impl<T: Real> SpectralReport<T> {
    /// One sentence on the number of gap eigenvalues.
    pub fn verdict(&self) -> String {
        let bound = match self.trace_bound.value {
            Some(v) => format!(
                "trace bound {:.6} permits at most {} oscillating mode(s)",
                v.to_f64_lossy(),
                self.trace_bound.predicted_max_modes.unwrap_or(0)
            ),
            None => "trace bound diverges, no a priori bound on the number of modes".to_string(),
        };
        let w2 = (self.omega_star * self.omega_star).to_f64_lossy();
        if self.modes.is_empty() {
            format!("no oscillating modes detected in (0, ω*²) = (0, {w2:.6}); {bound}")
        } else {
            let ls: Vec<String> = self.modes.iter().map(|m| format!("{:.6}", m.lambda.to_f64_lossy())).collect();
            format!(
                "{} oscillating mode(s) detected in (0, ω*²) = (0, {w2:.6}) at λ = {}; {bound}",
                self.modes.len(),
                ls.join(", ")
            )
        }
    }
}

/// Frequency map, bands, trace bound, eigencurves and modes of `ss`.
pub fn spectral_analysis<T: Real>(ss: &SteadyState<T>, cfg: &SpectralConfig<T>) -> Result<SpectralReport<T>> {
    if cfg.lambda_points < 2 {
        return Err(Error::InvalidParameter("at least two lambda points are needed".into()));
    }
    let fm = build_frequency_map(ss, cfg.n_e, cfg.n_l)?;
    let model = OrbitalFrequency::new(ss);
    let spectrum = essential_bands(&fm, cfg.k_max);
    let tb = trace_bound(ss, &fm, &model, fm.omega_star)?;
    let basis = build_basis(ss.r0(), cfg.basis_size, cfg.family)?;
    let kernel = prepare_response(ss, &fm, &basis, cfg.k_max)?;
    let lambdas = lambda_grid(fm.omega_star, cfg.lambda_points, cfg.lambda_depth);
    let curves = eigencurves(&kernel, &lambdas, cfg.curves)?;
    let modes = locate_modes(&kernel, &curves, cfg.mode_tolerance)?;
    let divergence = divergence_diagnostic(
        ss,
        &fm.domain,
        &model,
        fm.omega_star,
        cfg.epsilon * ss.r0(),
        cfg.diagnostic_resolution,
    )?;
    let kphi = kphi_trace_check(ss)?;
    let tail = kernel.tail_estimate(*lambdas.last().unwrap_or(&T::zero()));
    Ok(SpectralReport {
        omega_star: fm.omega_star,
        omega_max: fm.omega_max,
        argmin: fm.argmin,
        on_circular: fm.on_circular,
        spectrum,
        trace_bound: tb,
        eigencurves: curves,
        modes,
        diagnostics: SpectralDiagnostics {
            divergence,
            kphi_traces: kphi,
            tail_estimate: tail,
            d_omega_d_e_corner: fm.d_omega_d_e_corner,
            argmin_at_corner: fm.argmin_at_corner(),
        },
    })
}
