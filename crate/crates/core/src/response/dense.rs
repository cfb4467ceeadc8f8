//! Direct discretisation of the Birman–Schwinger operator without a
//! potential-density basis. Used as an independent check of the Galerkin
//! matrix normalisation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::linalg::{sym_eig, Matrix};
use crate::response::frequency::FrequencyMap;
use crate::scalar::Real;
use crate::steady_state::SteadyState;

/// Gram matrix, under `D(ρ, σ) = ∫∫ ρσ/|x - y|`, of the per-node response
/// densities
/// `d_{n,k} = sqrt(w_n |φ'_n| / π) · kω_n/sqrt(k²ω_n² - λ) · cos(kθ_r) δ_orbit`
/// for `k = 1..=k_max`. Between two orbit shells the kernel reduces to
/// `∫₀^{2π}∫₀^{2π} cos kθ cos k'θ' / max(r(θ), r'(θ')) dθ dθ'`, evaluated
/// with the trapezoid rule on the stored uniform-`θ` radii.
pub fn dense_reference<T: Real>(ss: &SteadyState<T>, fm: &FrequencyMap<T>, lambda: T, k_max: usize) -> Result<Matrix<T>> {
    let w2 = fm.omega_star * fm.omega_star;
    if !(lambda < w2) || lambda < T::zero() {
        return Err(Error::InsideEssentialSpectrum {
            lambda: lambda.to_f64_lossy(),
            limit: w2.to_f64_lossy(),
        });
    }
    let df = ss.df();
    let nodes = &fm.nodes;
    let nk = nodes.len() * k_max;
    // Per (node, k): prefactor and trapezoid-weighted cos(kθ_j) on [0, π].
    let mut pref = Vec::with_capacity(nk);
    let mut wcos: Vec<Vec<T>> = Vec::with_capacity(nk);
    for n in nodes {
        let radii = n.orbit.uniform_radii();
        let m = radii.len() - 1;
        let h = T::PI() / T::from_usize_lossy(m);
        for k in 1..=k_max {
            let kw = T::from_usize_lossy(k) * n.omega;
            pref.push((n.weight * df.abs_dphi(n.node.e) / T::PI()).sqrt() * kw / (kw * kw - lambda).sqrt());
            wcos.push(
                (0..=m)
                    .map(|j| {
                        let end = if j == 0 || j == m { T::lit(0.5) } else { T::one() };
                        let th = T::PI() * T::from_usize_lossy(j) / T::from_usize_lossy(m);
                        end * h * (T::from_usize_lossy(k) * th).cos()
                    })
                    .collect(),
            );
        }
    }
    let pairs: Vec<(usize, usize)> = (0..nodes.len()).flat_map(|a| (a..nodes.len()).map(move |b| (a, b))).collect();
    let blocks: Vec<Vec<T>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let ra = nodes[a].orbit.uniform_radii();
            let rb = nodes[b].orbit.uniform_radii();
            // t_{k, j'} = Σ_j wcos_{a,k}(j) / max(r_j, r'_{j'})
            let mut block = vec![T::zero(); k_max * k_max];
            let mut t = vec![T::zero(); k_max * rb.len()];
            for (jb, &rbj) in rb.iter().enumerate() {
                for (ja, &raj) in ra.iter().enumerate() {
                    let inv = T::one() / raj.max(rbj);
                    for k in 0..k_max {
                        t[k * rb.len() + jb] = t[k * rb.len() + jb] + wcos[a * k_max + k][ja] * inv;
                    }
                }
            }
            for k in 0..k_max {
                for kk in 0..k_max {
                    let wb = &wcos[b * k_max + kk];
                    let s: T = (0..rb.len()).map(|jb| t[k * rb.len() + jb] * wb[jb]).sum();
                    // Both angles over [0, 2π): four times the half-range sum.
                    block[k * k_max + kk] = T::lit(4.0) * s * pref[a * k_max + k] * pref[b * k_max + kk];
                }
            }
            block
        })
        .collect();
    let mut g = Matrix::zeros(nk, nk);
    for (&(a, b), block) in pairs.iter().zip(&blocks) {
        for k in 0..k_max {
            for kk in 0..k_max {
                let v = block[k * k_max + kk];
                g[(a * k_max + k, b * k_max + kk)] = v;
                g[(b * k_max + kk, a * k_max + k)] = v;
            }
        }
    }
    Ok(g)
}

/// Largest `count` eigenvalues of [`dense_reference`].
pub fn dense_top_eigenvalues<T: Real>(
    ss: &SteadyState<T>,
    fm: &FrequencyMap<T>,
    lambda: T,
    k_max: usize,
    count: usize,
) -> Result<Vec<T>> {
    let g = dense_reference(ss, fm, lambda, k_max)?;
    let eig = sym_eig(&g, None)?;
    Ok(eig.values.into_iter().take(count).collect())
}
