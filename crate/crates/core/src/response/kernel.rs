use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::Matrix;
use crate::orbits::fourier_coefficients;
use crate::response::basis::PotentialDensityBasis;
use crate::response::frequency::FrequencyMap;
use crate::scalar::Real;
use crate::steady_state::SteadyState;

/// Default distance kept between `λ` and the gap edge `ω*²`.
pub const DEFAULT_MARGIN: f64 = 1e-9;

/// Default number of radial harmonics.
pub const DEFAULT_K_MAX: usize = 8;

/// Nodes per work chunk. Fixed so that partial sums, and hence results,
/// do not depend on the number of worker threads.
const CHUNK: usize = 16;

/// Per-node data of the Galerkin response matrix
/// `B_ij(λ) = 8π³ Σ_k ∫∫ (L/ω) |φ'| k²ω²/(k²ω² - λ) Λ̂_{i,k} Λ̂_{j,k} dE dL`
/// in an orthonormal potential-density basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseKernel<T> {
    size: usize,
    k_max: usize,
    omega_star: T,
    omega: Vec<T>,
    /// `π · 8π² L/ω dE dL · |φ'|`, i.e. `8π³ (L/ω)|φ'| dE dL`.
    scale: Vec<T>,
    /// Node-major `[node][k - 1][i]` for `k = 1..=k_max + 1`; the extra
    /// harmonic only feeds the tail estimate.
    coeffs: Vec<T>,
}

pub fn prepare_response<T: Real>(
    ss: &SteadyState<T>,
    fm: &FrequencyMap<T>,
    basis: &PotentialDensityBasis<T>,
    k_max: usize,
) -> Result<ResponseKernel<T>> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let j = basis.size();
    let df = ss.df();
    let per_node: Vec<(T, Vec<T>)> = fm
        .nodes
        .par_iter()
        .map(|n| {
            let radii = n.orbit.uniform_radii();
            let pots: Vec<Vec<T>> = radii.iter().map(|&r| basis.potentials(r)).collect();
            let mut c = vec![T::zero(); (k_max + 1) * j];
            let mut samples = vec![T::zero(); radii.len()];
            for i in 0..j {
                for (s, p) in samples.iter_mut().zip(&pots) {
                    *s = p[i];
                }
                let f = fourier_coefficients(&samples, k_max + 1);
                for k in 1..=k_max + 1 {
                    c[(k - 1) * j + i] = f[k];
                }
            }
            (T::PI() * n.weight * df.abs_dphi(n.node.e), c)
        })
        .collect();
    let mut scale = Vec::with_capacity(per_node.len());
    let mut coeffs = Vec::with_capacity(per_node.len() * (k_max + 1) * j);
    for (s, c) in per_node {
        scale.push(s);
        coeffs.extend(c);
    }
    Ok(ResponseKernel {
        size: j,
        k_max,
        omega_star: fm.omega_star,
        omega: fm.nodes.iter().map(|n| n.omega).collect(),
        scale,
        coeffs,
    })
}

/// Builds `B(λ)` in one step.
pub fn assemble_response<T: Real>(
    ss: &SteadyState<T>,
    fm: &FrequencyMap<T>,
    basis: &PotentialDensityBasis<T>,
    lambda: T,
    k_max: usize,
) -> Result<Matrix<T>> {
    prepare_response(ss, fm, basis, k_max)?.matrix(lambda, T::lit(DEFAULT_MARGIN))
}

impl<T: Real> ResponseKernel<T> {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn omega_star(&self) -> T {
        self.omega_star
    }

    fn check_lambda(&self, lambda: T, margin: T) -> Result<()> {
        let limit = self.omega_star * self.omega_star - margin;
        if !(lambda < limit) || lambda < T::zero() {
            return Err(Error::InsideEssentialSpectrum {
                lambda: lambda.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
            });
        }
        Ok(())
    }

    fn node_coeffs(&self, n: usize, k: usize) -> &[T] {
        let j = self.size;
        let base = n * (self.k_max + 1) * j + (k - 1) * j;
        &self.coeffs[base..base + j]
    }

    fn resonance(&self, n: usize, k: usize, lambda: T) -> T {
        let kw = T::from_usize_lossy(k) * self.omega[n];
        let kw2 = kw * kw;
        kw2 / (kw2 - lambda)
    }

    /// `B(λ)`, summed over fixed node chunks in a fixed order.
    pub fn matrix(&self, lambda: T, margin: T) -> Result<Matrix<T>> {
        self.check_lambda(lambda, margin)?;
        let j = self.size;
        let n_nodes = self.scale.len();
        let partials: Vec<Vec<T>> = (0..n_nodes.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![T::zero(); j * j];
                for n in c * CHUNK..((c + 1) * CHUNK).min(n_nodes) {
                    for k in 1..=self.k_max {
                        let f = self.scale[n] * self.resonance(n, k, lambda);
                        let v = self.node_coeffs(n, k);
                        for a in 0..j {
                            let fa = f * v[a];
                            for b in a..j {
                                acc[a * j + b] = acc[a * j + b] + fa * v[b];
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        let mut m = Matrix::zeros(j, j);
        for p in &partials {
            for a in 0..j {
                for b in a..j {
                    m[(a, b)] = m[(a, b)] + p[a * j + b];
                }
            }
        }
        for a in 0..j {
            for b in 0..a {
                m[(a, b)] = m[(b, a)];
            }
        }
        Ok(m)
    }

    /// Estimate of `Tr Σ_{k > k_max}` from the decay of the last two
    /// harmonics, continued geometrically, with the resonance factor bounded
    /// by `1/(1 - λ/((k_max+1)² ω*²))`.
    pub fn tail_estimate(&self, lambda: T) -> T {
        let kn = self.k_max + 1;
        let bound = T::one() / (T::one() - lambda / (T::from_usize_lossy(kn * kn) * self.omega_star * self.omega_star));
        let mut last = T::zero();
        let mut prev = T::zero();
        for n in 0..self.scale.len() {
            let a: T = self.node_coeffs(n, kn).iter().map(|&c| c * c).sum();
            let b: T = self.node_coeffs(n, self.k_max).iter().map(|&c| c * c).sum();
            last = last + self.scale[n] * a;
            prev = prev + self.scale[n] * b;
        }
        if !(prev > T::zero()) {
            return T::zero();
        }
        let q = (last / prev).min(T::lit(0.99));
        bound * last / (T::one() - q)
    }
}
