//! Small dense linear algebra: row-major matrices, Cholesky, and the
//! symmetric (generalised) eigenproblem via Householder tridiagonalisation
//! followed by implicit QL.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// `max |A_ij - A_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)]) * T::lit(0.5))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
///
/// A pivot below `ε·4096·max diag` is reported as a degenerate Gram matrix.
pub fn cholesky<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    assert!(a.is_square(), "Cholesky needs a square matrix");
    let n = a.rows();
    let max_diag = (0..n).fold(T::zero(), |m, i| m.max(a[(i, i)].abs()));
    let floor = max_diag * T::epsilon() * T::lit(4096.0);
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(Error::DegenerateGram {
                index: j,
                pivot: d.to_f64_lossy(),
            });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix.
pub fn invert_lower<T: Real>(l: &Matrix<T>) -> Matrix<T> {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = T::one() / l[(j, j)];
        for i in (j + 1)..n {
            let mut s = T::zero();
            for k in j..i {
                s = s + l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

/// Eigen-decomposition with eigenvalues sorted in descending order and the
/// matching eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymEig<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

/// Solves `A x = μ B x` for symmetric `A` and symmetric positive definite
/// `B` (identity when `None`). Eigenvectors are `B`-orthonormal.
pub fn sym_eig<T: Real>(a: &Matrix<T>, b: Option<&Matrix<T>>) -> Result<SymEig<T>> {
    assert!(a.is_square(), "eigenproblem needs a square matrix");
    let tol = T::epsilon() * T::lit(1024.0) * a.max_abs().max(T::min_positive_value());
    let asym = a.asymmetry();
    if asym > tol {
        return Err(Error::NotSymmetric {
            asymmetry: asym.to_f64_lossy(),
        });
    }
    let a = a.symmetrized();
    match b {
        None => Ok(standard_eig(&a)),
        Some(b) => {
            let btol = T::epsilon() * T::lit(1024.0) * b.max_abs().max(T::min_positive_value());
            let basym = b.asymmetry();
            if basym > btol {
                return Err(Error::NotSymmetric {
                    asymmetry: basym.to_f64_lossy(),
                });
            }
            let l = cholesky(&b.symmetrized())?;
            let linv = invert_lower(&l);
            let c = linv.mul(&a).mul(&linv.transpose()).symmetrized();
            let eig = standard_eig(&c);
            let vectors = linv.transpose().mul(&eig.vectors);
            Ok(SymEig {
                values: eig.values,
                vectors,
            })
        }
    }
}

fn standard_eig<T: Real>(a: &Matrix<T>) -> SymEig<T> {
    let n = a.rows();
    if n == 0 {
        return SymEig {
            values: vec![],
            vectors: Matrix::zeros(0, 0),
        };
    }
    let mut v = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut v, &mut d, &mut e);
    implicit_ql(&mut v, &mut d, &mut e);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    SymEig { values, vectors }
}

/// Householder reduction to tridiagonal form; `v` receives the accumulated
/// orthogonal transform, `d` the diagonal and `e` the sub-diagonal.
fn tridiagonalize<T: Real>(v: &mut Matrix<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for x in &d[..i] {
            scale = scale + x.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
                v[(j, i)] = T::zero();
            }
        } else {
            for x in &mut d[..i] {
                *x = *x / scale;
                h = h + *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g = g + v[(k, j)] * d[k];
                    e[k] = e[k] + v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] = v[(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] = v[(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = T::zero();
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn implicit_ql<T: Real>(v: &mut Matrix<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            for _ in 0..(60 * n.max(1)) {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::lit(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(e[l].abs() > eps * tst1) {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> Matrix<f64> {
        Matrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64)
    }

    #[test]
    fn diagonal_matrix_sorted_descending() {
        let a = Matrix::from_fn(3, 3, |i, j| if i == j { [1.0, 5.0, -2.0][i] } else { 0.0 });
        let eig = sym_eig(&a, None).unwrap();
        assert_eq!(eig.values, vec![5.0, 1.0, -2.0]);
    }

    #[test]
    fn reconstructs_matrix() {
        let n = 7;
        let a = Matrix::from_fn(n, n, |i, j| ((i * j) as f64).cos() + (i + j) as f64 * 0.1);
        let a = a.symmetrized();
        let eig = sym_eig(&a, None).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += eig.vectors[(i, k)] * eig.values[k] * eig.vectors[(j, k)];
                }
                assert!((s - a[(i, j)]).abs() < 1e-12);
            }
        }
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn generalized_problem() {
        let n = 5;
        let a = Matrix::from_fn(n, n, |i, j| if i == j { 2.0 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 });
        let b = hilbert(n);
        let eig = sym_eig(&a, Some(&b)).unwrap();
        for k in 0..n {
            let x = eig.vectors.column(k);
            let ax = a.mul_vec(&x);
            let bx = b.mul_vec(&x);
            for i in 0..n {
                assert!((ax[i] - eig.values[k] * bx[i]).abs() < 1e-6 * eig.values[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn degenerate_gram_detected() {
        let b = Matrix::from_fn(3, 3, |_, _| 1.0);
        let a = Matrix::identity(3);
        assert!(matches!(sym_eig(&a, Some(&b)), Err(Error::DegenerateGram { .. })));
    }

    #[test]
    fn asymmetric_rejected() {
        let a = Matrix::from_fn(2, 2, |i, j| (i * 2 + j) as f64);
        assert!(matches!(sym_eig(&a, None), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn cholesky_roundtrip() {
        let a = hilbert(4);
        let l = cholesky(&a).unwrap();
        let back = l.mul(&l.transpose());
        for i in 0..4 {
            for j in 0..4 {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-14);
            }
        }
        let li = invert_lower(&l);
        let id = li.mul(&l);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - want).abs() < 1e-9);
            }
        }
    }
}
