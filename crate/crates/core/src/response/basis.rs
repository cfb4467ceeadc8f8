use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::{cholesky, invert_lower, Matrix};
use crate::numerics::quadrature::QuadratureRule;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisFamily {
    /// `ρ_j(r) = P_{j-1}(2r/R0 - 1)`.
    Legendre,
    /// `ρ_j(r) = j0(jπ r/R0)`.
    Bessel,
}

impl std::str::FromStr for BasisFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "legendre" => Ok(Self::Legendre),
            "bessel" => Ok(Self::Bessel),
            other => Err(Error::InvalidParameter(format!("unknown basis family '{other}'"))),
        }
    }
}

/// Radial potential-density pairs on `(0, R0)` with positive kernel
/// potentials `Λ_j(r) = 4π ∫ ρ_j(r') r'² / max(r, r') dr'`, orthonormal
/// under `D(ρ_i, ρ_j) = 4π ∫ ρ_i Λ_j r² dr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialDensityBasis<T> {
    family: BasisFamily,
    r0: T,
    size: usize,
    raw_gram: Matrix<T>,
    /// `C = L⁻¹` with `D = L Lᵀ`; orthonormal pairs are `C` times raw ones.
    transform: Matrix<T>,
}

pub fn build_basis<T: Real>(r0: T, size: usize, family: BasisFamily) -> Result<PotentialDensityBasis<T>> {
    if size == 0 {
        return Err(Error::InvalidParameter("basis size must be at least 1".into()));
    }
    if !(r0 > T::zero() && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!("basis radius must be positive, got {r0}")));
    }
    let mut basis = PotentialDensityBasis {
        family,
        r0,
        size,
        raw_gram: Matrix::identity(size),
        transform: Matrix::identity(size),
    };
    let gram = basis.coulomb_gram(false);
    let l = cholesky(&gram).map_err(|e| Error::RedundantBasis(Box::new(e)))?;
    basis.transform = invert_lower(&l);
    basis.raw_gram = gram;
    Ok(basis)
}

impl<T: Real> PotentialDensityBasis<T> {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn radius(&self) -> T {
        self.r0
    }

    /// Gram matrix of the raw pairs.
    pub fn raw_gram(&self) -> &Matrix<T> {
        &self.raw_gram
    }

    pub fn transform(&self) -> &Matrix<T> {
        &self.transform
    }

    /// Gravitational self-energy `D(ρ_j, ρ_j)/2` of raw density `j`.
    pub fn self_energy(&self, j: usize) -> T {
        self.raw_gram[(j, j)] * T::lit(0.5)
    }

    /// `D(ρ_i, ρ_j)` by quadrature, for raw or orthonormal pairs.
    pub fn coulomb_gram(&self, orthonormal: bool) -> Matrix<T> {
        let rule = QuadratureRule::gauss_legendre(64);
        let n = self.size;
        let mut g = Matrix::zeros(n, n);
        for (r, w) in rule.mapped(T::zero(), self.r0) {
            let (rho, lam) = if orthonormal {
                (self.densities(r), self.potentials(r))
            } else {
                (self.raw_densities(r), self.raw_potentials(r))
            };
            let f = T::four_pi() * w * r * r;
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] = g[(i, j)] + f * rho[i] * lam[j];
                }
            }
        }
        g.symmetrized()
    }

    pub fn raw_densities(&self, r: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.size];
        if r < T::zero() || r > self.r0 {
            return out;
        }
        match self.family {
            BasisFamily::Legendre => legendre_all(T::lit(2.0) * r / self.r0 - T::one(), &mut out),
            BasisFamily::Bessel => {
                for (j, o) in out.iter_mut().enumerate() {
                    *o = sinc(self.wavenumber(j) * r);
                }
            }
        }
        out
    }

    pub fn raw_potentials(&self, r: T) -> Vec<T> {
        match self.family {
            BasisFamily::Legendre => self.legendre_potentials(r),
            BasisFamily::Bessel => (0..self.size).map(|j| self.bessel_potential(j, r)).collect(),
        }
    }

    pub fn densities(&self, r: T) -> Vec<T> {
        self.transform.mul_vec(&self.raw_densities(r))
    }

    pub fn potentials(&self, r: T) -> Vec<T> {
        self.transform.mul_vec(&self.raw_potentials(r))
    }

    fn wavenumber(&self, j: usize) -> T {
        T::from_usize_lossy(j + 1) * T::PI() / self.r0
    }

    /// Exact for polynomial densities: Gauss rules of sufficient order on
    /// `[0, r]` and `[r, R0]`.
    fn legendre_potentials(&self, r: T) -> Vec<T> {
        let n = self.size;
        let rule = QuadratureRule::gauss_legendre(n / 2 + 3);
        let mut inner = vec![T::zero(); n];
        let mut outer = vec![T::zero(); n];
        let mut p = vec![T::zero(); n];
        let rc = r.min(self.r0).max(T::zero());
        if rc > T::zero() {
            for (x, w) in rule.mapped(T::zero(), rc) {
                legendre_all(T::lit(2.0) * x / self.r0 - T::one(), &mut p);
                for k in 0..n {
                    inner[k] = inner[k] + w * p[k] * x * x;
                }
            }
        }
        if rc < self.r0 {
            for (x, w) in rule.mapped(rc, self.r0) {
                legendre_all(T::lit(2.0) * x / self.r0 - T::one(), &mut p);
                for k in 0..n {
                    outer[k] = outer[k] + w * p[k] * x;
                }
            }
        }
        (0..n)
            .map(|k| {
                let a = if r > T::zero() { inner[k] / r } else { T::zero() };
                T::four_pi() * (a + outer[k])
            })
            .collect()
    }

    fn bessel_potential(&self, j: usize, r: T) -> T {
        let k = self.wavenumber(j);
        let k2 = k * k;
        let four_pi = T::four_pi();
        let kr0 = k * self.r0;
        if r >= self.r0 {
            return four_pi * (kr0.sin() - kr0 * kr0.cos()) / (k2 * k * r);
        }
        let x = k * r;
        // (sin x - x cos x)/x, with its series near 0.
        let a = if x < T::lit(1e-3) {
            let x2 = x * x;
            x2 / T::lit(3.0) - x2 * x2 / T::lit(30.0)
        } else {
            (x.sin() - x * x.cos()) / x
        };
        four_pi * (a + x.cos() - kr0.cos()) / k2
    }
}

/// `P_0 .. P_{n-1}` at `x` by the three-term recurrence.
fn legendre_all<T: Real>(x: T, out: &mut [T]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = T::one();
    if n > 1 {
        out[1] = x;
    }
    for k in 1..n.saturating_sub(1) {
        let kf = T::from_usize_lossy(k);
        out[k + 1] = ((kf + kf + T::one()) * x * out[k] - kf * out[k - 1]) / (kf + T::one());
    }
}

fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_ball_self_energy() {
        let b = build_basis(1.0f64, 1, BasisFamily::Legendre).unwrap();
        assert!((b.raw_gram()[(0, 0)] - 32.0 * PI * PI / 15.0).abs() < 1e-10);
        assert!((b.self_energy(0) - 16.0 * PI * PI / 15.0).abs() < 1e-10);
        for r in [1.0, 1.5, 4.0] {
            let lam = b.raw_potentials(r)[0];
            assert!((lam - 4.0 * PI / 3.0 / r).abs() < 1e-13);
        }
        // Interior: 2π(1 - r²/3).
        let lam = b.raw_potentials(0.5)[0];
        assert!((lam - 2.0 * PI * (1.0 - 0.25 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn orthonormal_after_cholesky() {
        for fam in [BasisFamily::Legendre, BasisFamily::Bessel] {
            let b = build_basis(2.5f64, 10, fam).unwrap();
            let g = b.coulomb_gram(true);
            for i in 0..10 {
                for j in 0..10 {
                    let d = if i == j { 1.0 } else { 0.0 };
                    assert!((g[(i, j)] - d).abs() < 1e-10, "{fam:?} {i} {j} {}", g[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn bessel_potential_solves_poisson() {
        let b = build_basis(1.0f64, 3, BasisFamily::Bessel).unwrap();
        // -ΔΛ = 4πρ, checked by central differences.
        let r = 0.37;
        let h = 1e-4;
        let f = |x: f64| b.raw_potentials(x);
        let (a, c, m) = (f(r - h), f(r + h), f(r));
        let rho = b.raw_densities(r);
        for j in 0..3 {
            let lap = (c[j] - 2.0 * m[j] + a[j]) / (h * h) + (c[j] - a[j]) / (h * r);
            assert!((lap + 4.0 * PI * rho[j]).abs() < 1e-5, "{j} {lap}");
        }
    }
}
