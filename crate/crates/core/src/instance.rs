//! Feasibility systems `x_1 A_1 + ... + x_m A_m + B ⪰ 0`, regular-form
//! detection and tail indices.
//!
//! Variable and block numbers are 1-based, as in the mathematics; matrix
//! row/column indices are 0-based.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};
use crate::symmat::{IndexSet, SymMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSystem {
    n: usize,
    a: Vec<SymMatrix<Rational>>,
    b: SymMatrix<Rational>,
    fixed_tail: Option<Vec<Rational>>,
    label: String,
}

impl SdpSystem {
    pub fn new(
        a: Vec<SymMatrix<Rational>>,
        b: SymMatrix<Rational>,
        fixed_tail: Option<Vec<Rational>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = b.n();
        if n == 0 {
            return Err(Error::Malformed("matrix dimension must be positive".into()));
        }
        if a.is_empty() {
            return Err(Error::Malformed("at least one variable is required".into()));
        }
        if let Some((i, m)) = a.iter().enumerate().find(|(_, m)| m.n() != n) {
            return Err(Error::DimensionMismatch(format!(
                "A_{} is {}x{} but B is {n}x{n}",
                i + 1,
                m.n(),
                m.n()
            )));
        }
        if let Some(t) = &fixed_tail {
            if t.len() > a.len() {
                return Err(Error::Malformed(format!(
                    "fixed tail has {} values for {} variables",
                    t.len(),
                    a.len()
                )));
            }
        }
        Ok(SdpSystem { n, a, b, fixed_tail, label: label.into() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// Constraint matrices `A_1..A_m` (0-based slice).
    pub fn a(&self) -> &[SymMatrix<Rational>] {
        &self.a
    }

    pub fn b(&self) -> &SymMatrix<Rational> {
        &self.b
    }

    pub fn fixed_tail(&self) -> Option<&[Rational]> {
        self.fixed_tail.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_fixed_tail(mut self, tail: Option<Vec<Rational>>) -> Result<Self> {
        if let Some(t) = &tail {
            if t.len() > self.m() {
                return Err(Error::Malformed("fixed tail longer than the variable list".into()));
            }
        }
        self.fixed_tail = tail;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `S(x) = Σ x_i A_i + B` for a full assignment `x_1..x_m`.
    pub fn evaluate<R: Scalar>(&self, x: &[R]) -> Result<SymMatrix<R>> {
        if x.len() != self.m() {
            return Err(Error::DimensionMismatch(format!("{} values for {} variables", x.len(), self.m())));
        }
        let mut s = self.b.map(R::from_rational);
        for (xi, ai) in x.iter().zip(&self.a) {
            if xi.is_zero() {
                continue;
            }
            for (i, j, v) in ai.triplets() {
                let cur = s.get(i, j).clone();
                s.set(i, j, cur + xi.clone() * R::from_rational(&v));
            }
        }
        Ok(s)
    }

    /// Appends the fixed tail to `head = x_1..x_k`, yielding a full assignment.
    pub fn complete<R: Scalar>(&self, head: &[R]) -> Result<Vec<R>> {
        let tail = self
            .fixed_tail
            .as_ref()
            .ok_or_else(|| Error::NotPartiallyStrict("system has no fixed tail".into()))?;
        if head.len() + tail.len() != self.m() {
            return Err(Error::DimensionMismatch(format!(
                "{} leading values and {} fixed values for {} variables",
                head.len(),
                tail.len(),
                self.m()
            )));
        }
        let mut x: Vec<R> = head.to_vec();
        x.extend(tail.iter().map(R::from_rational));
        Ok(x)
    }
}

/// Block sizes `r_1..r_k` of a regular facial reduction sequence together
/// with the matrix dimension; block `I_t` for `t = 1..=k+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    n: usize,
    r: Vec<usize>,
}

impl BlockPartition {
    pub fn new(n: usize, r: Vec<usize>) -> Result<Self> {
        if r.contains(&0) {
            return Err(Error::InvalidArgument("block sizes must be positive".into()));
        }
        if r.iter().sum::<usize>() > n {
            return Err(Error::InvalidArgument(format!("block sizes {r:?} exceed dimension {n}")));
        }
        Ok(BlockPartition { n, r })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.r.len()
    }

    pub fn r(&self) -> &[usize] {
        &self.r
    }

    /// `true` when `r_1 + ... + r_k = n`, so `I_{k+1}` is empty.
    pub fn is_degenerate(&self) -> bool {
        self.k() > 0 && self.r.iter().sum::<usize>() == self.n
    }

    /// 0-based row range of block `I_t`, `t = 1..=k+1`.
    pub fn block(&self, t: usize) -> Range<usize> {
        assert!(t >= 1 && t <= self.k() + 1, "block index {t} out of 1..={}", self.k() + 1);
        let start: usize = self.r[..t - 1].iter().sum();
        let end = if t == self.k() + 1 { self.n } else { start + self.r[t - 1] };
        start..end
    }

    pub fn index_set(&self, t: usize) -> IndexSet {
        let b = self.block(t);
        IndexSet::range(b.start, b.end)
    }

    /// `I_s ∪ ... ∪ I_t`.
    pub fn span(&self, s: usize, t: usize) -> IndexSet {
        IndexSet::range(self.block(s).start, self.block(t).end)
    }
}

/// Checks whether the trailing region of `a` starting at `offset` equals
/// `diag(I_r, 0)` for some `r >= 1` and returns that `r`.
fn template_rank(a: &SymMatrix<Rational>, offset: usize) -> Option<usize> {
    let n = a.n();
    let one = Rational::one();
    let r = (offset..n).take_while(|&i| *a.get(i, i) == one).count();
    if r == 0 {
        return None;
    }
    for i in offset..n {
        for j in i..n {
            let expected_one = i == j && i < offset + r;
            let v = a.get(i, j);
            if expected_one {
                continue;
            }
            if !v.is_zero() {
                return None;
            }
        }
    }
    Some(r)
}

/// Longest prefix `A_1..A_k` forming a regular facial reduction sequence.
pub fn validate_regular(sys: &SdpSystem) -> BlockPartition {
    let mut offset = 0;
    let mut r = Vec::new();
    for a in sys.a() {
        if offset >= sys.n() {
            break;
        }
        match template_rank(a, offset) {
            Some(rj) => {
                r.push(rj);
                offset += rj;
            }
            None => break,
        }
    }
    BlockPartition { n: sys.n(), r }
}

/// Tail indices `t_2..t_k`, 1-based block numbers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TailIndexVector {
    k: usize,
    t: Vec<usize>,
}

impl TailIndexVector {
    /// Wraps `t_2..t_k` for a sequence of length `k = t.len() + 1`.
    pub fn new(t: Vec<usize>) -> Self {
        let k = t.len() + 1;
        TailIndexVector { k, t }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.t
    }

    /// `t_{j+1}` for `j = 1..k-1`.
    pub fn tail(&self, j: usize) -> usize {
        self.t[j - 1]
    }

    /// Requires `j + 2 <= t_{j+1} <= k + 1` for every `j`.
    pub fn validate(&self) -> Result<()> {
        for (idx, &t) in self.t.iter().enumerate() {
            let j = idx + 1;
            if t < j + 2 || t > self.k + 1 {
                return Err(Error::InvalidTails(format!(
                    "t_{} = {t} must lie in {}..={} (k = {})",
                    j + 1,
                    j + 2,
                    self.k + 1,
                    self.k
                )));
            }
        }
        Ok(())
    }

    /// All valid tail vectors for sequence length `k`, in lexicographic order.
    pub fn enumerate(k: usize) -> Vec<TailIndexVector> {
        let mut out = Vec::new();
        if k < 2 {
            return out;
        }
        let mut cur: Vec<usize> = (1..k).map(|j| j + 2).collect();
        loop {
            out.push(TailIndexVector::new(cur.clone()));
            // odometer over positions, last position fastest
            let mut pos = cur.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                if cur[pos] < k + 1 {
                    cur[pos] += 1;
                    for (p, v) in cur.iter_mut().enumerate().skip(pos + 1) {
                        *v = p + 3;
                    }
                    break;
                }
            }
        }
    }
}

/// Position and value of the pivot entry selected for each `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pivot {
    /// 0-based row in `I_j`.
    pub l1: usize,
    /// 0-based column in `I_{t_{j+1}}`.
    pub l2: usize,
    pub beta: Rational,
}

/// Tail indices and their pivots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailAnalysis {
    pub tails: TailIndexVector,
    pub pivots: Vec<Pivot>,
}

/// `t_{j+1} = max { t : A_{j+1}(I_j, I_t) ≠ 0 }` for `j = 1..k-1`, with the
/// lexicographically smallest nonzero entry of that block as pivot.
pub fn tail_indices(sys: &SdpSystem, part: &BlockPartition) -> Result<TailAnalysis> {
    let k = part.k();
    if k < 2 {
        return Err(Error::InvalidArgument(format!("tail indices need k >= 2, got k = {k}")));
    }
    let mut tails = Vec::with_capacity(k - 1);
    let mut pivots = Vec::with_capacity(k - 1);
    for j in 1..k {
        let a = &sys.a()[j];
        let rows = part.block(j);
        let found = (j..=k + 1).rev().find_map(|t| {
            let cols = part.block(t);
            rows.clone().find_map(|l1| {
                cols.clone()
                    .find(|&l2| !a.get(l1, l2).is_zero())
                    .map(|l2| (t, Pivot { l1, l2, beta: a.get(l1, l2).clone() }))
            })
        });
        let Some((t, pivot)) = found else {
            return Err(Error::Malformed(format!(
                "A_{} has no nonzero entry in rows I_{j} at or right of block {j}",
                j + 1
            )));
        };
        tails.push(t);
        pivots.push(pivot);
    }
    Ok(TailAnalysis { tails: TailIndexVector { k, t: tails }, pivots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_diagonal_first_matrix_is_not_regular() {
        let a1 = SymMatrix::unit(2, 0, 1);
        let sys = SdpSystem::new(alloc::vec![a1], SymMatrix::zeros(2), None, "x").unwrap();
        assert_eq!(validate_regular(&sys).k(), 0);
    }

    #[test]
    fn identity_is_degenerate_single_step() {
        let sys = SdpSystem::new(alloc::vec![SymMatrix::identity(3)], SymMatrix::zeros(3), None, "id").unwrap();
        let p = validate_regular(&sys);
        assert_eq!(p.r(), &[3]);
        assert!(p.is_degenerate());
        assert_eq!(p.block(2), 3..3);
    }

    #[test]
    fn block_ranges() {
        let p = BlockPartition::new(6, alloc::vec![2, 1]).unwrap();
        assert_eq!(p.block(1), 0..2);
        assert_eq!(p.block(2), 2..3);
        assert_eq!(p.block(3), 3..6);
        assert_eq!(p.span(2, 3).members(), &[2, 3, 4, 5]);
        assert!(BlockPartition::new(2, alloc::vec![2, 1]).is_err());
    }

    #[test]
    fn enumerate_counts_factorial() {
        let fact = [1usize, 1, 1, 2, 6, 24, 120];
        for k in 2..=6 {
            let all = TailIndexVector::enumerate(k);
            assert_eq!(all.len(), fact[k]);
            assert!(all.iter().all(|t| t.validate().is_ok()));
        }
    }

    #[test]
    fn evaluate_adds_terms() {
        let sys = SdpSystem::new(
            alloc::vec![SymMatrix::unit(2, 0, 0), SymMatrix::unit(2, 0, 1)],
            SymMatrix::unit(2, 1, 1),
            Some(alloc::vec![]),
            "k2",
        )
        .unwrap();
        let s = sys.evaluate(&[4.0f64, 2.0]).unwrap();
        assert_eq!((*s.get(0, 0), *s.get(0, 1), *s.get(1, 1)), (4.0, 2.0, 1.0));
        assert!(sys.evaluate(&[1.0f64]).is_err());
    }
}
