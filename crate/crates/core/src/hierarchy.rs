//! Quadratic certificates read off 2×2 principal minors, and the exponent
//! hierarchy `x_j ≳ x_{j+1}^{α_{j+1}}` computed two independent ways.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::{BlockPartition, SdpSystem, TailAnalysis, TailIndexVector};
use crate::scalar::{Rational, Real, Scalar};

/// `constant + Σ coeffs[i] x_i`, with every variable index above `start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm {
    pub start: usize,
    pub coeffs: BTreeMap<usize, Rational>,
    pub constant: Rational,
}

impl LinearForm {
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    /// `true` when no variable appears.
    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Evaluates at a full assignment `x_1..x_m` (0-based slice).
    pub fn evaluate<R: Real>(&self, x: &[R]) -> R {
        self.coeffs
            .iter()
            .fold(R::from_rational(&self.constant), |acc, (&i, c)| acc + R::from_rational(c) * x[i - 1].clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuadraticKind {
    /// `(x_j + δ_j)(x_t + δ_t) − (β x_{j+1} + δ_{j+1})²`, `t ≤ k`.
    Type1,
    /// `(x_j + δ_j) δ_k − (β x_{j+1} + δ_{j+1})²`, `t = k + 1`.
    Type2,
}

/// The quadratic `p_j`, the determinant of `S` restricted to rows and columns
/// `(ℓ1, ℓ2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedQuadratic {
    pub kind: QuadraticKind,
    pub j: usize,
    pub t: usize,
    pub beta: Rational,
    pub delta_j: LinearForm,
    pub delta_j1: LinearForm,
    /// `δ_t` for type 1, `δ_k` for type 2.
    pub delta_t: LinearForm,
    /// 0-based pivot row and column.
    pub pivot: (usize, usize),
}

impl DerivedQuadratic {
    /// `p_j(x)` at a full assignment `x_1..x_m`.
    pub fn evaluate<R: Real>(&self, x: &[R]) -> R {
        let lead = x[self.j - 1].clone() + self.delta_j.evaluate(x);
        let other = match self.kind {
            QuadraticKind::Type1 => x[self.t - 1].clone() + self.delta_t.evaluate(x),
            QuadraticKind::Type2 => self.delta_t.evaluate(x),
        };
        let cross = R::from_rational(&self.beta) * x[self.j].clone() + self.delta_j1.evaluate(x);
        lead * other - cross.clone() * cross
    }
}

/// Linear form of entry `(a, b)` of `S`, without variable `skip`, substituting
/// the fixed tail for variables above `k` when present.
fn entry_form(sys: &SdpSystem, k: usize, a: usize, b: usize, skip: usize, start: usize) -> Result<LinearForm> {
    let tail = sys.fixed_tail().filter(|t| t.len() + k == sys.m());
    let mut coeffs = BTreeMap::new();
    let mut constant = sys.b().get(a, b).clone();
    for (idx, mat) in sys.a().iter().enumerate() {
        let i = idx + 1;
        let v = mat.get(a, b);
        if i == skip || v.is_zero() {
            continue;
        }
        if i <= start {
            return Err(Error::Malformed(format!(
                "entry ({}, {}) involves x_{i}, expected only variables above x_{start}",
                a + 1,
                b + 1
            )));
        }
        match tail {
            Some(t) if i > k => constant += v.clone() * t[i - k - 1].clone(),
            _ => {
                coeffs.insert(i, v.clone());
            }
        }
    }
    Ok(LinearForm { start, coeffs, constant })
}

/// Builds `p_1..p_{k-1}` from the pivots of [`crate::instance::tail_indices`].
pub fn derive_quadratics(
    sys: &SdpSystem,
    part: &BlockPartition,
    tails: &TailAnalysis,
) -> Result<Vec<DerivedQuadratic>> {
    let k = part.k();
    if k < 2 {
        return Err(Error::InvalidArgument(format!("quadratics need k >= 2, got k = {k}")));
    }
    tails.tails.validate()?;
    let mut out = Vec::with_capacity(k - 1);
    for j in 1..k {
        let t = tails.tails.tail(j);
        let piv = &tails.pivots[j - 1];
        let (l1, l2) = (piv.l1, piv.l2);
        let kind = if t <= k { QuadraticKind::Type1 } else { QuadraticKind::Type2 };
        let delta_j = entry_form(sys, k, l1, l1, j, j)?;
        let delta_j1 = entry_form(sys, k, l1, l2, j + 1, j + 1)?;
        let delta_t = match kind {
            QuadraticKind::Type1 => entry_form(sys, k, l2, l2, t, t)?,
            QuadraticKind::Type2 => entry_form(sys, k, l2, l2, 0, k)?,
        };
        out.push(DerivedQuadratic { kind, j, t, beta: piv.beta.clone(), delta_j, delta_j1, delta_t, pivot: (l1, l2) });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExponentMethod {
    Recursion,
    FourierMotzkin,
    MinimalClosedForm,
}

/// Empirical constant `d_{j+1}` and fit residual for one adjacent pair.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedConstant {
    pub d: f64,
    pub residual: f64,
}

/// Exponents `α_2..α_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentHierarchy {
    k: usize,
    alpha: Vec<Rational>,
    pub method: ExponentMethod,
    pub fits: Option<Vec<FittedConstant>>,
}

impl ExponentHierarchy {
    pub fn new(alpha: Vec<Rational>, method: ExponentMethod) -> Self {
        ExponentHierarchy { k: alpha.len() + 1, alpha, method, fits: None }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `α_2..α_k` as a slice.
    pub fn alpha(&self) -> &[Rational] {
        &self.alpha
    }

    /// `α_{j}` for `j = 2..=k`.
    pub fn alpha_at(&self, j: usize) -> &Rational {
        &self.alpha[j - 2]
    }

    /// Checks `α_k = 2` and `1 + 1/(k−j) ≤ α_{j+1} ≤ 2` for every `j`.
    pub fn check_bounds(&self) -> Result<()> {
        let k = self.k;
        let two = Rational::from(2);
        if let Some(last) = self.alpha.last() {
            if *last != two {
                return Err(Error::InvalidTails(format!("α_{k} = {last}, expected 2")));
            }
        }
        for j in 1..k {
            let a = self.alpha_at(j + 1);
            let lo = Rational::one() + Rational::from_parts(1u8.into(), ((k - j) as u64).into());
            if *a < lo || *a > two {
                return Err(Error::InvalidTails(format!("α_{} = {a} outside [{lo}, 2]", j + 1)));
            }
        }
        Ok(())
    }
}

fn product(alpha: &[Rational]) -> Rational {
    alpha.iter().fold(Rational::one(), |acc, a| acc * a.clone())
}

/// `α_{j+1} = 2 − 1/(α_{j+2} ⋯ α_{t_{j+1}})` when `t_{j+1} ≤ k`, else `2`.
pub fn exponents_recursion(tails: &TailIndexVector) -> Result<ExponentHierarchy> {
    let k = tails.k();
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    tails.validate()?;
    // alpha[i] holds α_{i+2}
    let mut alpha = vec![Rational::zero(); k - 1];
    let two = Rational::from(2);
    for j in (1..k).rev() {
        let t = tails.tail(j);
        alpha[j - 1] = if t <= k {
            two.clone() - Rational::one() / product(&alpha[j..t - 1])
        } else {
            two.clone()
        };
    }
    Ok(ExponentHierarchy::new(alpha, ExponentMethod::Recursion))
}

/// Dense row `Σ c_i y_i ≥ 0` over `y_1..y_k` (index 0 unused).
type Row = Vec<Rational>;

fn normalize(row: Row) -> Option<Row> {
    let lead = row.iter().find(|c| !c.is_zero())?.abs();
    Some(row.into_iter().map(|c| c / lead.clone()).collect())
}

/// One Fourier–Motzkin step: eliminates `y_v` from `rows`.
fn eliminate(rows: Vec<Row>, v: usize) -> Vec<Row> {
    let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        if r[v] > Rational::zero() {
            pos.push(r);
        } else if r[v] < Rational::zero() {
            neg.push(r);
        } else {
            rest.push(r);
        }
    }
    for p in &pos {
        for q in &neg {
            // p[v] * q + (-q[v]) * p cancels y_v; both multipliers positive
            let (a, b) = (p[v].clone(), -q[v].clone());
            let combined: Row = p.iter().zip(q).map(|(x, y)| a.clone() * y.clone() + b.clone() * x.clone()).collect();
            if let Some(c) = normalize(combined) {
                if !rest.contains(&c) {
                    rest.push(c);
                }
            }
        }
    }
    rest
}

/// Exponents by eliminating `y_k, y_{k-1}, …` from the log-linear system
/// `y_j + y_t ≥ 2 y_{j+1}` (type 1) and `y_j ≥ 2 y_{j+1}` (type 2).
///
/// For each `j` (descending) the row for `p_j` is combined with the bounds
/// already derived for larger indices; after eliminating `y_k … y_{j+2}` the
/// surviving rows `a y_j − b y_{j+1} ≥ 0` give `α_{j+1} = max b/a`.
pub fn exponents_fourier_motzkin(tails: &TailIndexVector) -> Result<ExponentHierarchy> {
    let k = tails.k();
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    tails.validate()?;
    let mut bounds: Vec<Row> = Vec::new();
    let mut alpha = vec![Rational::zero(); k - 1];
    for j in (1..k).rev() {
        let t = tails.tail(j);
        let mut row = vec![Rational::zero(); k + 1];
        row[j] = Rational::one();
        row[j + 1] = Rational::from(-2);
        if t <= k {
            row[t] = row[t].clone() + Rational::one();
        }
        let mut rows = bounds.clone();
        rows.push(row);
        for v in (j + 2..=k).rev() {
            rows = eliminate(rows, v);
        }
        let best = rows
            .iter()
            .filter(|r| r[j] > Rational::zero() && r[(j + 2)..].iter().all(|c| c.is_zero()))
            .map(|r| -r[j + 1].clone() / r[j].clone())
            .max()
            .ok_or_else(|| Error::InvalidTails(format!("no bound on y_{j} survives elimination")))?;
        let mut bound = vec![Rational::zero(); k + 1];
        bound[j] = Rational::one();
        bound[j + 1] = -best.clone();
        bounds.push(bound);
        alpha[j - 1] = best;
    }
    Ok(ExponentHierarchy::new(alpha, ExponentMethod::FourierMotzkin))
}

/// `α_{j+1} = 1 + 1/(k − j)`.
pub fn minimal_exponents(k: usize) -> Result<ExponentHierarchy> {
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    let alpha = (1..k)
        .map(|j| Rational::one() + Rational::from_parts(1u8.into(), ((k - j) as u64).into()))
        .collect();
    Ok(ExponentHierarchy::new(alpha, ExponentMethod::MinimalClosedForm))
}

/// `Π α_j`, the exponent `e` in `x_1 ≳ x_k^e`.
pub fn magnitude_gap(h: &ExponentHierarchy) -> Rational {
    product(h.alpha())
}
