//! Dense symmetric matrices over a [`Scalar`], congruence transforms,
//! principal submatrices and definiteness tests.
//!
//! Indices are 0-based throughout the Rust API; the text formats use 1-based
//! triplets.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::scalar::{Float, Rational, Real, Scalar};

/// Symmetric `n × n` matrix stored as its packed upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    upper: Vec<T>,
}

#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, upper: vec![T::zero(); n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(f(i, j));
            }
        }
        SymMatrix { n, upper }
    }

    /// Builds a symmetric matrix from row-major data, reading the upper triangle.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("expected {n} columns in every row")));
        }
        for i in 0..n {
            for j in i + 1..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Malformed(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j].clone()))
    }

    /// `E_ij + E_ji` for `i != j`, `E_ii` on the diagonal.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.set(i, j, T::one());
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.upper[packed(self.n, i, j)]
    }

    /// Sets entries `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let idx = packed(self.n, i, j);
        self.upper[idx] = v;
    }

    pub fn map<U: Scalar>(&self, mut f: impl FnMut(&T) -> U) -> SymMatrix<U> {
        SymMatrix { n: self.n, upper: self.upper.iter().map(&mut f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|v| v.is_zero())
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    /// Nonzero upper-triangle entries `(i, j, value)` with `i <= j`, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                if !v.is_zero() {
                    out.push((i, j, v.clone()));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: &T, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| if b.is_zero() { a.clone() } else { a.clone() + s.clone() * b.clone() })
                .collect(),
        }
    }

    /// Frobenius inner product `tr(self * other)`.
    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let p = self.get(i, j).clone() * other.get(i, j).clone();
                acc = if i == j { acc + p } else { acc + p.clone() + p };
            }
        }
        acc
    }

    pub fn to_matrix(&self) -> Matrix<T> {
        Matrix::from_fn(self.n, self.n, |i, j| self.get(i, j).clone())
    }

    /// `sum_i coeffs[i] * mats[i]`; `mats` must be nonempty or `n` is used for the zero matrix.
    pub fn combination(n: usize, coeffs: &[T], mats: &[SymMatrix<T>]) -> Self {
        let mut acc = Self::zeros(n);
        for (c, m) in coeffs.iter().zip(mats) {
            if !c.is_zero() {
                acc = acc.add_scaled(c, m);
            }
        }
        acc
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch(format!("ragged rows, expected {c} columns")));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j].clone()))
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if !b.is_zero() {
                        let v = out.get(i, j).clone() + a.clone() * b.clone();
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }
}

/// Sorted set of distinct 0-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IndexSet {
    members: Vec<usize>,
}

impl IndexSet {
    /// Sorts and validates the members; duplicates are rejected.
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("duplicate index in {members:?}")));
        }
        Ok(IndexSet { members })
    }

    pub fn range(start: usize, end: usize) -> Self {
        IndexSet { members: (start..end).collect() }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut m = self.members.clone();
        m.extend_from_slice(&other.members);
        m.sort_unstable();
        m.dedup();
        IndexSet { members: m }
    }
}

/// `Tᵀ M T` for a matrix `T` with `n` rows.
pub fn congruence<T: Scalar>(m: &SymMatrix<T>, t: &Matrix<T>) -> Result<SymMatrix<T>> {
    if t.rows() != m.n() {
        return Err(Error::DimensionMismatch(format!(
            "congruence of a {}x{} matrix by a {}x{} transform",
            m.n(),
            m.n(),
            t.rows(),
            t.cols()
        )));
    }
    let mt = m.to_matrix().mul(t)?;
    let p = t.cols();
    Ok(SymMatrix::from_fn(p, |i, j| {
        (0..t.rows()).fold(T::zero(), |acc, l| {
            let a = t.get(l, i);
            if a.is_zero() {
                acc
            } else {
                acc + a.clone() * mt.get(l, j).clone()
            }
        })
    }))
}

/// `M(S, S)`.
pub fn principal_submatrix<T: Scalar>(m: &SymMatrix<T>, s: &IndexSet) -> Result<SymMatrix<T>> {
    if let Some(&bad) = s.members().iter().find(|&&i| i >= m.n()) {
        return Err(Error::IndexOutOfRange { index: bad, n: m.n() });
    }
    let idx = s.members();
    Ok(SymMatrix::from_fn(idx.len(), |i, j| m.get(idx[i], idx[j]).clone()))
}

/// Classification of a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Definiteness {
    Pd,
    Psd,
    Indefinite,
}

/// Default relative tolerance `2^-64`.
pub const DEFAULT_TOL: f64 = 5.421010862427522e-20;

const BK_ALPHA: f64 = 0.6403882032022076;

/// Symmetric scaling by exact powers of two: unit-order diagonal where the
/// diagonal is nonzero, unit-order row maximum elsewhere.
fn equilibrate<R: Real>(m: &SymMatrix<R>) -> SymMatrix<R> {
    let n = m.n();
    let shifts: Vec<i64> = (0..n)
        .map(|i| {
            if let Some(e) = m.get(i, i).binary_exponent() {
                return -e.div_euclid(2);
            }
            let mut best: Option<i64> = None;
            for j in 0..n {
                if let Some(e) = m.get(i, j).binary_exponent() {
                    best = Some(best.map_or(e, |b: i64| b.max(e)));
                }
            }
            best.map_or(0, |e| -e.div_euclid(2))
        })
        .collect();
    SymMatrix::from_fn(n, |i, j| m.get(i, j).mul_pow2(shifts[i] + shifts[j]))
}

/// Eigenvalues of the block-diagonal factor of a Bunch–Kaufman `LDLᵀ`
/// factorisation (symmetric pivoting, ties to the lowest index).
pub fn ldl_pivots<R: Real>(m: &SymMatrix<R>) -> Vec<R> {
    let n = m.n();
    let mut a: Vec<Vec<R>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j).clone()).collect()).collect();
    let alpha = R::from_f64(BK_ALPHA);
    let mut out = Vec::with_capacity(n);
    let swap = |a: &mut Vec<Vec<R>>, p: usize, q: usize| {
        if p != q {
            a.swap(p, q);
            for row in a.iter_mut() {
                row.swap(p, q);
            }
        }
    };
    let mut k = 0;
    while k < n {
        let akk = a[k][k].abs();
        let mut r = k;
        let mut w1 = R::zero();
        for i in k + 1..n {
            let v = a[i][k].abs();
            if v > w1 {
                w1 = v;
                r = i;
            }
        }
        if akk.is_zero() && w1.is_zero() {
            out.push(R::zero());
            k += 1;
            continue;
        }
        let mut two = false;
        if akk < alpha.clone() * w1.clone() {
            let mut wr = R::zero();
            for i in k..n {
                if i != r {
                    let v = a[i][r].abs();
                    if v > wr {
                        wr = v;
                    }
                }
            }
            if akk.clone() * wr.clone() >= alpha.clone() * w1.clone() * w1.clone() {
                // 1x1 pivot at k
            } else if a[r][r].abs() >= alpha.clone() * wr {
                swap(&mut a, k, r);
            } else {
                swap(&mut a, k + 1, r);
                two = true;
            }
        }
        if !two {
            let d = a[k][k].clone();
            for i in k + 1..n {
                let f = a[i][k].clone() / d.clone();
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let v = a[i][j].clone() - f.clone() * a[k][j].clone();
                    a[i][j] = v;
                }
            }
            out.push(d);
            k += 1;
        } else {
            let (p, q, s) = (a[k][k].clone(), a[k][k + 1].clone(), a[k + 1][k + 1].clone());
            let det = p.clone() * s.clone() - q.clone() * q.clone();
            for i in k + 2..n {
                let (u, v) = (a[i][k].clone(), a[i][k + 1].clone());
                // row i times E^{-1}
                let c0 = (u.clone() * s.clone() - v.clone() * q.clone()) / det.clone();
                let c1 = (v * p.clone() - u * q.clone()) / det.clone();
                for j in k + 2..n {
                    let val = a[i][j].clone() - c0.clone() * a[k][j].clone() - c1.clone() * a[k + 1][j].clone();
                    a[i][j] = val;
                }
            }
            let two_r = R::from_i64(2);
            let mean = (p.clone() + s.clone()) / two_r.clone();
            let half = (p - s) / two_r;
            let rad = (half.clone() * half + q.clone() * q).sqrt();
            out.push(mean.clone() - rad.clone());
            out.push(mean + rad);
            k += 2;
        }
    }
    out
}

/// Classifies `m` via pivoted `LDLᵀ` after power-of-two equilibration.
///
/// A pivot eigenvalue `d` counts as positive when `d > tol * (1 + Σ|m_ii|)`
/// and as nonnegative when `d >= -tol * (1 + Σ|m_ii|)`, both measured on the
/// equilibrated matrix.
pub fn definiteness<R: Real>(m: &SymMatrix<R>, tol: f64) -> Definiteness {
    let eq = equilibrate(m);
    let scale = (0..eq.n()).fold(R::one(), |acc, i| acc + eq.get(i, i).abs());
    let tau = R::from_f64(tol) * scale;
    let pivots = ldl_pivots(&eq);
    if pivots.iter().all(|d| *d > tau) {
        Definiteness::Pd
    } else if pivots.iter().all(|d| *d >= -tau.clone()) {
        Definiteness::Psd
    } else {
        Definiteness::Indefinite
    }
}

/// [`definiteness`] for a rational matrix, evaluated in 256-bit floats.
pub fn definiteness_rational(m: &SymMatrix<Rational>, tol: f64) -> Definiteness {
    definiteness(&m.map(Float::from_rational), tol)
}

/// `true` when `m` classifies as positive definite at the default tolerance.
pub fn is_pd<R: Real>(m: &SymMatrix<R>) -> bool {
    definiteness(m, DEFAULT_TOL) == Definiteness::Pd
}

/// Counts of positive, negative and zero eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inertia {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn rank(&self) -> usize {
        self.pos + self.neg
    }

    pub fn is_psd(&self) -> bool {
        self.neg == 0
    }

    pub fn is_pd(&self) -> bool {
        self.neg == 0 && self.zero == 0
    }
}

/// Exact inertia by symmetric Gaussian elimination over the rationals.
pub fn inertia(m: &SymMatrix<Rational>) -> Inertia {
    let n = m.n();
    let mut a: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j).clone()).collect()).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let (mut pos, mut neg) = (0, 0);
    let eliminate = |a: &mut Vec<Vec<Rational>>, active: &[usize], p: usize| {
        let d = a[p][p].clone();
        for &i in active {
            if a[i][p].is_zero() {
                continue;
            }
            let f = a[i][p].clone() / d.clone();
            for &j in active {
                if !a[p][j].is_zero() {
                    let v = a[i][j].clone() - f.clone() * a[p][j].clone();
                    a[i][j] = v;
                }
            }
        }
    };
    while !active.is_empty() {
        if let Some(pi) = active.iter().position(|&i| !a[i][i].is_zero()) {
            let p = active.remove(pi);
            if a[p][p] > Rational::zero() {
                pos += 1;
            } else {
                neg += 1;
            }
            eliminate(&mut a, &active, p);
            continue;
        }
        // zero diagonal: a nonzero off-diagonal entry gives a 2x2 pivot with inertia (1, 1)
        let pair = active.iter().enumerate().find_map(|(x, &i)| {
            active[x + 1..].iter().find(|&&j| !a[i][j].is_zero()).map(|&j| (i, j))
        });
        let Some((i, j)) = pair else { break };
        // replace row/col i by row i + row j: diagonal becomes 2 a_ij != 0
        let rows_j: Vec<Rational> = a[j].clone();
        for l in 0..n {
            let v = a[i][l].clone() + rows_j[l].clone();
            a[i][l] = v;
        }
        for l in 0..n {
            let v = a[l][i].clone() + a[l][j].clone();
            a[l][i] = v;
        }
    }
    let rank = pos + neg;
    Inertia { pos, neg, zero: n - rank }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::float_int;

    fn q(v: i64) -> Rational {
        Rational::from(v)
    }

    fn sym(rows: &[&[i64]]) -> SymMatrix<Rational> {
        let rows: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect();
        SymMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn packed_storage_symmetrizes() {
        let mut m = SymMatrix::<Rational>::zeros(3);
        m.set(2, 0, q(5));
        assert_eq!(*m.get(0, 2), q(5));
        assert_eq!(m.triplets(), vec![(0, 2, q(5))]);
    }

    #[test]
    fn congruence_examples() {
        let m = sym(&[&[1, 0], &[0, 0]]);
        let swap = Matrix::from_rows(&[vec![q(0), q(1)], vec![q(1), q(0)]]).unwrap();
        assert_eq!(congruence(&m, &swap).unwrap(), sym(&[&[0, 0], &[0, 1]]));
        let off = sym(&[&[0, 1], &[1, 0]]);
        let t = Matrix::from_rows(&[vec![q(1), q(1)], vec![q(1), q(-1)]]).unwrap();
        assert_eq!(congruence(&off, &t).unwrap(), sym(&[&[2, 0], &[0, -2]]));
        assert_eq!(congruence(&off, &Matrix::identity(2)).unwrap(), off);
        assert!(congruence(&off, &Matrix::identity(3)).is_err());
    }

    #[test]
    fn principal_submatrix_examples() {
        let d = sym(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 3]]);
        assert_eq!(principal_submatrix(&d, &IndexSet::new(vec![1]).unwrap()).unwrap(), sym(&[&[2]]));
        assert_eq!(principal_submatrix(&d, &IndexSet::range(0, 3)).unwrap(), d);
        assert!(principal_submatrix(&d, &IndexSet::new(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn definiteness_examples() {
        assert_eq!(definiteness_rational(&sym(&[&[1, 0], &[0, 1]]), DEFAULT_TOL), Definiteness::Pd);
        assert_eq!(definiteness_rational(&sym(&[&[0, 1], &[1, 0]]), DEFAULT_TOL), Definiteness::Indefinite);
        assert_eq!(definiteness_rational(&sym(&[&[4, 2], &[2, 1]]), DEFAULT_TOL), Definiteness::Psd);
    }

    #[test]
    fn definiteness_is_scale_free() {
        // [[x1, x2], [x2, 1]] with x1 = 2 x2^2 at x2 = 2^80: PD, Schur complement 1/2
        let x2 = float_int(1).mul_pow2(80);
        let x1 = x2.clone() * x2.clone() * float_int(2);
        let m = SymMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => x1.clone(),
            (0, 1) => x2.clone(),
            _ => float_int(1),
        });
        assert_eq!(definiteness(&m, DEFAULT_TOL), Definiteness::Pd);
        let tight = SymMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => x2.clone() * x2.clone(),
            (0, 1) => x2.clone(),
            _ => float_int(1),
        });
        assert_eq!(definiteness(&tight, DEFAULT_TOL), Definiteness::Psd);
    }

    #[test]
    fn exact_inertia() {
        assert_eq!(inertia(&sym(&[&[0, 1], &[1, 0]])), Inertia { pos: 1, neg: 1, zero: 0 });
        assert_eq!(inertia(&sym(&[&[4, 2], &[2, 1]])), Inertia { pos: 1, neg: 0, zero: 1 });
        assert_eq!(
            inertia(&sym(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 0]])),
            Inertia { pos: 1, neg: 1, zero: 1 }
        );
        assert_eq!(inertia(&SymMatrix::zeros(2)), Inertia { pos: 0, neg: 0, zero: 2 });
    }
}
