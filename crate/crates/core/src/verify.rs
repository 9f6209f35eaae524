//! Strictly feasible points at prescribed scale, minimal completions and
//! empirical exponent fits, all in 256-bit floats.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hierarchy::FittedConstant;
use crate::instance::{BlockPartition, SdpSystem};
use crate::scalar::{float_int, pow2, rational_to_f64, Float, Rational, Real, Scalar};
use crate::symmat::{is_pd, principal_submatrix, SymMatrix};

/// Largest power-of-two exponent tried for any coordinate.
pub const MAX_EXPONENT: i64 = 4096;

/// Default absolute tolerance on fitted slopes.
pub const SLOPE_TOL: f64 = 0.05;

/// Checks that the fixed tail has length `m − k` and `Z(I_{k+1}) ≻ 0`.
pub fn check_partially_strict(sys: &SdpSystem, part: &BlockPartition) -> Result<()> {
    let k = part.k();
    let tail = sys
        .fixed_tail()
        .ok_or_else(|| Error::NotPartiallyStrict("system has no fixed tail".into()))?;
    if tail.len() + k != sys.m() {
        return Err(Error::NotPartiallyStrict(format!(
            "fixed tail has {} values, expected m - k = {}",
            tail.len(),
            sys.m().saturating_sub(k)
        )));
    }
    let rows = part.index_set(k + 1);
    if rows.is_empty() {
        return Ok(());
    }
    let x = sys.complete(&vec![Float::zero(); k])?;
    let z = principal_submatrix(&sys.evaluate(&x)?, &rows)?;
    if !is_pd(&z) {
        return Err(Error::NotPartiallyStrict("Z(I_{k+1}) is not positive definite".into()));
    }
    Ok(())
}

/// Diagonal block `I_j ∪ … ∪ I_{k+1}` of `S` at `x_j..x_k = vals`
/// (earlier variables do not reach this block).
fn trailing_block(sys: &SdpSystem, part: &BlockPartition, j: usize, vals: &[Float]) -> Result<SymMatrix<Float>> {
    let k = part.k();
    let mut head = vec![Float::zero(); k];
    head[j - 1..].clone_from_slice(vals);
    let s = sys.evaluate(&sys.complete(&head)?)?;
    principal_submatrix(&s, &part.span(j, k + 1))
}

fn block_pd(sys: &SdpSystem, part: &BlockPartition, j: usize, xj: &Float, rest: &[Float]) -> Result<bool> {
    let mut vals = Vec::with_capacity(rest.len() + 1);
    vals.push(xj.clone());
    vals.extend_from_slice(rest);
    Ok(is_pd(&trailing_block(sys, part, j, &vals)?))
}

/// Smallest `e` in `0..=MAX_EXPONENT` with the block PD at `x_j = 2^e`.
fn smallest_pd_power(sys: &SdpSystem, part: &BlockPartition, j: usize, rest: &[Float]) -> Result<Option<i64>> {
    if !block_pd(sys, part, j, &pow2(MAX_EXPONENT), rest)? {
        return Ok(None);
    }
    if block_pd(sys, part, j, &pow2(0), rest)? {
        return Ok(Some(0));
    }
    let (mut lo, mut hi) = (0i64, MAX_EXPONENT);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if block_pd(sys, part, j, &pow2(mid), rest)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Greedy strictly feasible point with `x_k = scale`: each `x_j` (descending)
/// is twice the smallest power of two that makes the trailing block PD.
pub fn greedy_strict_point(sys: &SdpSystem, part: &BlockPartition, scale: &Float) -> Result<Vec<Float>> {
    check_partially_strict(sys, part)?;
    let k = part.k();
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut x = vec![Float::zero(); k];
    x[k - 1] = scale.clone();
    if !block_pd(sys, part, k, scale, &[])? {
        return Err(Error::ScaleTooSmall(format!("block I_k..I_(k+1) is not PD at x_k = {}", Real::to_f64(scale))));
    }
    for j in (1..k).rev() {
        let e = smallest_pd_power(sys, part, j, &x[j..])?
            .ok_or_else(|| Error::ScaleTooSmall(format!("no x_{j} <= 2^{MAX_EXPONENT} makes the block PD")))?;
        x[j - 1] = pow2(e + 1);
    }
    if !is_pd(&sys.evaluate(&sys.complete(&x)?)?) {
        return Err(Error::ScaleTooSmall("constructed point is not strictly feasible".into()));
    }
    Ok(x)
}

/// Infimum of `x_j` keeping block `I_j..I_{k+1}` PD given `x_{j+1}..x_k = rest`,
/// bisected to relative gap `2^-20`; returns the PD (upper) endpoint.
pub fn minimal_completion(sys: &SdpSystem, part: &BlockPartition, j: usize, rest: &[Float]) -> Result<Float> {
    let k = part.k();
    if j == 0 || j > k || rest.len() != k - j {
        return Err(Error::InvalidArgument(format!("minimal completion of x_{j} needs {} trailing values", k.saturating_sub(j))));
    }
    check_partially_strict(sys, part)?;
    let trailing_ok = if j == k {
        true
    } else {
        is_pd(&trailing_block(sys, part, j + 1, rest)?)
    };
    if !trailing_ok {
        return Err(Error::TrailingNotPd(format!("block I_{}..I_{} at the given values", j + 1, k + 1)));
    }
    let pd = |v: &Float| block_pd(sys, part, j, v, rest);
    let one = float_int(1);
    let (mut lo, mut hi);
    if pd(&one)? {
        if pd(&Float::zero())? {
            // threshold is negative: walk down through -1, -2, -4, ...
            hi = Float::zero();
            lo = -one.clone();
            let mut steps = 0;
            while pd(&lo)? {
                hi = lo.clone();
                lo = lo.mul_pow2(1);
                steps += 1;
                if steps > MAX_EXPONENT {
                    return Err(Error::InvalidArgument(format!("x_{j} is unbounded below")));
                }
            }
        } else {
            hi = one.clone();
            let mut steps = 0;
            while pd(&hi.mul_pow2(-1))? {
                hi = hi.mul_pow2(-1);
                steps += 1;
                if steps > MAX_EXPONENT {
                    break;
                }
            }
            lo = hi.mul_pow2(-1);
        }
    } else {
        let e = smallest_pd_power(sys, part, j, rest)?
            .ok_or_else(|| Error::ScaleTooSmall(format!("no x_{j} <= 2^{MAX_EXPONENT} makes the block PD")))?;
        hi = pow2(e);
        lo = pow2(e - 1);
    }
    let gap = pow2(-20);
    loop {
        let width = hi.clone() - lo.clone();
        let mag = if hi.abs() > lo.abs() { hi.abs() } else { lo.abs() };
        if width <= gap.clone() * mag {
            break;
        }
        let mid = (lo.clone() + hi.clone()).mul_pow2(-1);
        if pd(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Moves a completion strictly inside the feasible region.
fn safety(v: Float) -> Float {
    if v.is_zero() {
        float_int(1)
    } else if v < Float::zero() {
        v.mul_pow2(-1)
    } else {
        v.mul_pow2(1)
    }
}

/// Chain of minimal completions below `x_k = scale`, each inflated by the
/// safety factor; the result is verified strictly feasible.
pub fn sweep_point(sys: &SdpSystem, part: &BlockPartition, scale: &Float) -> Result<Vec<Float>> {
    check_partially_strict(sys, part)?;
    let k = part.k();
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut x = vec![Float::zero(); k];
    x[k - 1] = scale.clone();
    if !block_pd(sys, part, k, scale, &[])? {
        return Err(Error::ScaleTooSmall(format!("block I_k..I_(k+1) is not PD at x_k = {}", Real::to_f64(scale))));
    }
    for j in (1..k).rev() {
        let m = minimal_completion(sys, part, j, &x[j..])?;
        x[j - 1] = safety(m);
    }
    if !is_pd(&sys.evaluate(&sys.complete(&x)?)?) {
        return Err(Error::ScaleTooSmall("sweep point is not strictly feasible".into()));
    }
    Ok(x)
}

/// Least-squares fit of `ln x_j` against `ln x_{j+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairFit {
    pub j: usize,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleSweep {
    pub scales: Vec<Float>,
    pub points: Vec<Vec<Float>>,
    pub fits: Vec<PairFit>,
}

impl ScaleSweep {
    pub fn constants(&self) -> Vec<FittedConstant> {
        self.fits
            .iter()
            .map(|f| FittedConstant { d: libm::exp(f.intercept), residual: f.residual })
            .collect()
    }
}

fn ln(x: &Float) -> f64 {
    Real::log2(x) * core::f64::consts::LN_2
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| { let d = y - intercept - slope * x; d * d }).sum();
    (slope, intercept, libm::sqrt(ss / n))
}

/// Fits every adjacent pair over the top half of the scales.
pub fn fit_sweep(scales: Vec<Float>, points: Vec<Vec<Float>>) -> Result<ScaleSweep> {
    let k = points.first().map_or(0, |p| p.len());
    let start = scales.len() / 2;
    let mut fits = Vec::new();
    for j in 1..k {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for p in &points[start..] {
            if p[j - 1] <= Float::zero() || p[j] <= Float::zero() {
                return Err(Error::InvalidArgument(format!("nonpositive x_{j} or x_{} in sweep", j + 1)));
            }
            xs.push(ln(&p[j]));
            ys.push(ln(&p[j - 1]));
        }
        let (slope, intercept, residual) = least_squares(&xs, &ys);
        fits.push(PairFit { j, slope, intercept, residual });
    }
    Ok(ScaleSweep { scales, points, fits })
}

/// Checks the scale list: at least 4 values, strictly increasing, positive,
/// spanning at least three decades.
pub fn check_scales(scales: &[Float]) -> Result<()> {
    if scales.len() < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 scales, got {}", scales.len())));
    }
    if scales.windows(2).any(|w| w[0] >= w[1]) || scales[0] <= Float::zero() {
        return Err(Error::InvalidArgument("scales must be positive and strictly increasing".into()));
    }
    let decades = (Real::log2(&scales[scales.len() - 1]) - Real::log2(&scales[0])) / libm::log2(10.0);
    if decades < 3.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!("scales span {decades:.2} decades, need at least 3")));
    }
    Ok(())
}

/// Sweeps the given scales and fits log–log slopes for each adjacent pair.
pub fn empirical_exponents(sys: &SdpSystem, part: &BlockPartition, scales: &[Float]) -> Result<ScaleSweep> {
    check_scales(scales)?;
    let points = scales.iter().map(|s| sweep_point(sys, part, s)).collect::<Result<Vec<_>>>()?;
    fit_sweep(scales.to_vec(), points)
}

/// `count` scales `10^e` with `e` evenly spaced on `[lo, hi]`.
pub fn log_spaced_scales(lo: f64, hi: f64, count: usize) -> Vec<Float> {
    (0..count)
        .map(|i| {
            let e = if count == 1 { lo } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 };
            Float::from_f64(libm::pow(10.0, e))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairVerdict {
    pub j: usize,
    pub predicted: Rational,
    pub slope: f64,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyReport {
    pub pairs: Vec<PairVerdict>,
}

impl HierarchyReport {
    pub fn pass(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }
}

/// Compares fitted slopes against `alpha = α_2..α_k`: each slope must be
/// within `tol` of `α_{j+1}` and inside `[1 + 1/(k−j) − tol, 2 + tol]`.
pub fn check_hierarchy(sweep: &ScaleSweep, alpha: &[Rational], tol: f64) -> HierarchyReport {
    let k = alpha.len() + 1;
    let pairs = alpha
        .iter()
        .enumerate()
        .map(|(idx, a)| {
            let j = idx + 1;
            let fit = sweep.fits.iter().find(|f| f.j == j);
            let predicted = rational_to_f64(a);
            let (slope, residual) = fit.map_or((f64::NAN, f64::NAN), |f| (f.slope, f.residual));
            let lower = 1.0 + 1.0 / (k - j) as f64 - tol;
            let pass = (slope - predicted).abs() <= tol && slope >= lower && slope <= 2.0 + tol;
            PairVerdict { j, predicted: a.clone(), slope, residual, pass }
        })
        .collect();
    HierarchyReport { pairs }
}

fn power<T: Scalar>(x: &T, e: usize) -> T {
    (0..e).fold(T::one(), |acc, _| acc * x.clone())
}

/// For moments `y_1..y_{2n}` (`y[i-1] = y_i`, `y_0 = 1`) checks
/// `y_{2(n−j+1)} ≥ y_{2(n−j)}^{1 + 1/(n−j)}` for `j = 1..n−1`, in the exact
/// form `y_{2(n−j+1)}^{n−j} ≥ y_{2(n−j)}^{n−j+1}`. Returns
/// `(j, lhs − rhs)` per inequality.
pub fn moment_chain_margins<T: Scalar>(y: &[T]) -> Vec<(usize, T)> {
    let n = y.len() / 2;
    (1..n)
        .map(|j| {
            let p = n - j;
            let hi = &y[2 * (n - j + 1) - 1];
            let lo = &y[2 * (n - j) - 1];
            (j, power(hi, p) - power(lo, p + 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_exact_line() {
        let (s, c, r) = least_squares(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((s - 2.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn scale_checks() {
        assert!(check_scales(&log_spaced_scales(2.0, 5.0, 7)).is_ok());
        assert!(check_scales(&log_spaced_scales(2.0, 4.0, 7)).is_err());
        assert!(check_scales(&log_spaced_scales(2.0, 5.0, 3)).is_err());
    }

    #[test]
    fn dirac_moments_are_tight() {
        let y: Vec<Rational> = (1..=6).map(|i| Rational::from(1i64 << i)).collect();
        assert!(moment_chain_margins(&y).iter().all(|(_, m)| m.is_zero()));
    }
}
