//! Small dense linear algebra: exact row reduction over the rationals and a
//! few `f64` kernels used by the numerical cone search.

use alloc::vec;
use alloc::vec::Vec;

use crate::scalar::{Rational, Scalar};
use crate::symmat::Matrix;

/// Reduced row echelon form of `a`; returns the matrix and its pivot columns.
pub fn rref(a: &Matrix<Rational>) -> (Matrix<Rational>, Vec<usize>) {
    let (rows, cols) = (a.rows(), a.cols());
    let mut m: Vec<Vec<Rational>> = (0..rows).map(|i| a.row(i).to_vec()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Rational::one() / m[r][c].clone();
        for v in m[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    if !m[r][j].is_zero() {
                        let v = m[i][j].clone() - f.clone() * m[r][j].clone();
                        m[i][j] = v;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let out = Matrix::from_fn(rows, cols, |i, j| m[i][j].clone());
    (out, pivots)
}

pub fn rank(a: &Matrix<Rational>) -> usize {
    rref(a).1.len()
}

/// Basis of `{v : a v = 0}`, one vector per free column.
pub fn nullspace(a: &Matrix<Rational>) -> Vec<Vec<Rational>> {
    let cols = a.cols();
    let (r, pivots) = rref(a);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -r.get(row, free).clone();
        }
        basis.push(v);
    }
    basis
}

/// Solves `a x = b` for square invertible `a`; `None` when singular.
pub fn solve(a: &Matrix<Rational>, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.rows();
    let aug = Matrix::from_fn(n, n + 1, |i, j| if j < n { a.get(i, j).clone() } else { b[i].clone() });
    let (r, pivots) = rref(&aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some((0..n).map(|i| r.get(i, n).clone()).collect())
}

/// Exact determinant by Gaussian elimination.
pub fn determinant(a: &Matrix<Rational>) -> Rational {
    let n = a.rows();
    let mut m: Vec<Vec<Rational>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else { return Rational::zero() };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c].clone();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() / m[c][c].clone();
            for j in c..n {
                let v = m[i][j].clone() - f.clone() * m[c][j].clone();
                m[i][j] = v;
            }
        }
    }
    det
}

/// Exact inverse; `None` when singular.
pub fn inverse(a: &Matrix<Rational>) -> Option<Matrix<Rational>> {
    let n = a.rows();
    let aug = Matrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            a.get(i, j).clone()
        } else if j - n == i {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    let (r, pivots) = rref(&aug);
    if n > 0 && (pivots.len() < n || pivots[n - 1] != n - 1) {
        return None;
    }
    Some(Matrix::from_fn(n, n, |i, j| r.get(i, n + j).clone()))
}

/// Row-major dense `f64` square matrix helpers.
pub mod dense {
    use alloc::vec;
    use alloc::vec::Vec;

    pub type Mat = Vec<Vec<f64>>;

    pub fn zeros(n: usize) -> Mat {
        vec![vec![0.0; n]; n]
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = zeros(n);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        m
    }

    pub fn mul(a: &Mat, b: &Mat) -> Mat {
        let n = a.len();
        let p = b[0].len();
        let mut out = vec![vec![0.0; p]; n];
        for i in 0..n {
            for l in 0..b.len() {
                let v = a[i][l];
                if v != 0.0 {
                    for j in 0..p {
                        out[i][j] += v * b[l][j];
                    }
                }
            }
        }
        out
    }

    /// `tr(a b)` for square matrices.
    pub fn trace_product(a: &Mat, b: &Mat) -> f64 {
        let n = a.len();
        let mut s = 0.0;
        for i in 0..n {
            for l in 0..n {
                s += a[i][l] * b[l][i];
            }
        }
        s
    }

    /// Lower Cholesky factor; `None` unless numerically positive definite.
    pub fn cholesky(a: &Mat) -> Option<Mat> {
        let n = a.len();
        let mut l = zeros(n);
        for j in 0..n {
            let mut d = a[j][j];
            for k in 0..j {
                d -= l[j][k] * l[j][k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = libm::sqrt(d);
            l[j][j] = d;
            for i in j + 1..n {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / d;
            }
        }
        Some(l)
    }

    /// Inverse and log-determinant from a Cholesky factor.
    pub fn cholesky_inverse(l: &Mat) -> (Mat, f64) {
        let n = l.len();
        let mut logdet = 0.0;
        for (i, row) in l.iter().enumerate() {
            logdet += 2.0 * libm::log(row[i]);
        }
        // invert L column by column, then form L^{-T} L^{-1}
        let mut linv = zeros(n);
        for c in 0..n {
            for i in c..n {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for k in c..i {
                    s -= l[i][k] * linv[k][c];
                }
                linv[i][c] = s / l[i][i];
            }
        }
        let mut inv = zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in i..n {
                    s += linv[k][i] * linv[k][j];
                }
                inv[i][j] = s;
                inv[j][i] = s;
            }
        }
        (inv, logdet)
    }

    /// Gaussian elimination with partial pivoting; `None` when singular.
    pub fn solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
        let n = a.len();
        let mut m: Vec<Vec<f64>> = a
            .iter()
            .zip(b)
            .map(|(row, &bi)| {
                let mut r = row.clone();
                r.push(bi);
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
            if m[p][c] == 0.0 || !m[p][c].is_finite() {
                return None;
            }
            m.swap(c, p);
            for i in c + 1..n {
                let f = m[i][c] / m[c][c];
                if f != 0.0 {
                    for j in c..=n {
                        m[i][j] -= f * m[c][j];
                    }
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = m[i][n];
            for j in i + 1..n {
                s -= m[i][j] * x[j];
            }
            x[i] = s / m[i][i];
        }
        Some(x)
    }

    /// Eigenvalues (ascending) and eigenvectors (columns) by cyclic Jacobi rotations.
    pub fn symmetric_eigen(a: &Mat) -> (Vec<f64>, Mat) {
        let n = a.len();
        let mut m = a.clone();
        let mut v = identity(n);
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[i][j] * m[i][j])
                .sum();
            let scale: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum::<f64>() + off;
            if off <= 1e-30 * scale || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if m[p][q] == 0.0 {
                        continue;
                    }
                    let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                    let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / libm::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let (mkp, mkq) = (m[k][p], m[k][q]);
                        m[k][p] = c * mkp - s * mkq;
                        m[k][q] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let (mpk, mqk) = (m[p][k], m[q][k]);
                        m[p][k] = c * mpk - s * mqk;
                        m[q][k] = s * mpk + c * mqk;
                    }
                    for row in v.iter_mut() {
                        let (vp, vq) = (row[p], row[q]);
                        row[p] = c * vp - s * vq;
                        row[q] = s * vp + c * vq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
        let values = order.iter().map(|&i| m[i][i]).collect();
        let vectors = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
        (values, vectors)
    }
}
