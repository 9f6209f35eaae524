//! Facial reduction of a general system into regular form.
//!
//! Each step decides the cone alternative for the current span: either a
//! nonzero PSD matrix `Σ λ_i A_i` exists (restricted to the current face), or
//! a positive definite `W` is orthogonal to every `A_i`. The search runs a
//! log-barrier path-following method in `f64`; its iterates are rounded to
//! nearby simple rationals and the resulting certificate is checked in exact
//! arithmetic. Only exactly verified certificates are returned.
//!
//! Faces are tracked as rational subspaces, so the regular-form template of
//! the output is exact; only the final diagonal rescaling to unit identity
//! blocks involves square roots.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use dashu_base::{SquareRoot, UnsignedAbs};

use crate::error::{Error, Result};
use crate::instance::{validate_regular, SdpSystem};
use crate::linalg::{self, dense};
use crate::scalar::{float_from_rational, rational_to_f64, simplest_rational, snap, Float, Rational, Real, Scalar};
use crate::symmat::{congruence, inertia, Matrix, SymMatrix};

/// Default eigenvalue-ratio cut for numerical ranks.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Cap on Newton iterations per cone search.
pub const MAX_NEWTON: usize = 10_000;

/// Relative tolerance of the certificate round trip, `2^-30`.
pub const ROUND_TRIP_TOL: f64 = 9.313225746154785e-10;

const RANGE_GAP: f64 = 10.0;
const SNAP_TOLS: [f64; 9] = [1e-12, 1e-10, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

#[derive(Clone, Debug, PartialEq)]
pub enum ConeAlternative {
    /// `Y = Σ λ_i A_i` is PSD and nonzero with exact rank `rank`.
    NonzeroPsdInSpan { coeffs: Vec<Rational>, y: SymMatrix<Rational>, rank: usize },
    /// `W ≻ 0` with `A_i • W = 0` for all `i`.
    PdInPerp { witness: SymMatrix<Rational> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeResult {
    pub alternative: ConeAlternative,
    /// Rank of `Y(μ)` at the last search iterate under the eigenvalue-ratio cut.
    pub numerical_rank: Option<usize>,
    /// Set when a PSD matrix was certified but maximality of its rank was not.
    pub heuristic: bool,
}

fn to_dense(m: &SymMatrix<Rational>) -> dense::Mat {
    let n = m.n();
    (0..n).map(|i| (0..n).map(|j| rational_to_f64(m.get(i, j))).collect()).collect()
}

fn frob(a: &dense::Mat, b: &dense::Mat) -> f64 {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x * y).sum::<f64>()).sum()
}

/// Exact orthogonal projection onto the complement of a span of symmetric
/// matrices (Frobenius inner product).
struct PerpProjector {
    basis: Vec<SymMatrix<Rational>>,
    gram_inv: Matrix<Rational>,
}

impl PerpProjector {
    fn new(span: &[SymMatrix<Rational>]) -> Self {
        let mut basis: Vec<SymMatrix<Rational>> = Vec::new();
        for a in span {
            let mut trial = basis.clone();
            trial.push(a.clone());
            let g = Matrix::from_fn(trial.len(), trial.len(), |i, j| trial[i].dot(&trial[j]));
            if linalg::rank(&g) == trial.len() {
                basis = trial;
            }
        }
        let g = Matrix::from_fn(basis.len(), basis.len(), |i, j| basis[i].dot(&basis[j]));
        let gram_inv = linalg::inverse(&g).unwrap_or_else(|| Matrix::zeros(0, 0));
        PerpProjector { basis, gram_inv }
    }

    fn project(&self, w: &SymMatrix<Rational>) -> SymMatrix<Rational> {
        if self.basis.is_empty() {
            return w.clone();
        }
        let rhs: Vec<Rational> = self.basis.iter().map(|a| a.dot(w)).collect();
        let c = self.gram_inv.mul_vec(&rhs);
        let mut out = w.clone();
        for (ci, a) in c.iter().zip(&self.basis) {
            out = out.add_scaled(&-ci.clone(), a);
        }
        out
    }

    fn certify(&self, w: &SymMatrix<Rational>) -> Option<SymMatrix<Rational>> {
        let p = self.project(w);
        inertia(&p).is_pd().then_some(p)
    }
}

struct Candidate {
    coeffs: Vec<Rational>,
    y: SymMatrix<Rational>,
    rank: usize,
}

fn primal_candidate(span: &[SymMatrix<Rational>], lambda: &[f64], d: usize) -> Option<Candidate> {
    let scale = lambda.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let mut best: Option<Candidate> = None;
    for tol in SNAP_TOLS {
        let coeffs: Option<Vec<Rational>> = lambda.iter().map(|v| snap(v / scale, tol)).collect();
        let Some(coeffs) = coeffs else { continue };
        if coeffs.iter().all(|c| c.is_zero()) {
            continue;
        }
        let y = SymMatrix::combination(d, &coeffs, span);
        let inr = inertia(&y);
        if inr.neg == 0 && inr.pos > 0 && best.as_ref().is_none_or(|b| inr.pos > b.rank) {
            best = Some(Candidate { coeffs, y, rank: inr.pos });
        }
    }
    best
}

/// Rational basis (rows) near the row space of `rows`, by full-pivot
/// elimination and snapping of the non-pivot entries.
fn rational_rowspace(rows: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<Rational>>> {
    let mut a = rows.to_vec();
    let (rho, d) = (a.len(), a.first()?.len());
    let mut pivots = Vec::with_capacity(rho);
    for r in 0..rho {
        let mut best = (r, 0, 0.0f64);
        for (i, row) in a.iter().enumerate().skip(r) {
            for (c, v) in row.iter().enumerate() {
                if !pivots.contains(&c) && v.abs() > best.2 {
                    best = (i, c, v.abs());
                }
            }
        }
        if !(best.2 > 1e-12) {
            return None;
        }
        a.swap(r, best.0);
        let pc = best.1;
        let pv = a[r][pc];
        for x in a[r].iter_mut() {
            *x /= pv;
        }
        for i in 0..rho {
            if i != r {
                let f = a[i][pc];
                for c in 0..d {
                    a[i][c] -= f * a[r][c];
                }
            }
        }
        pivots.push(pc);
    }
    a.iter()
        .enumerate()
        .map(|(r, row)| {
            (0..d)
                .map(|c| match pivots.iter().position(|&p| p == c) {
                    Some(pr) => Some(if pr == r { Rational::one() } else { Rational::zero() }),
                    None => snap(row[c], tol),
                })
                .collect()
        })
        .collect()
}

/// Searches combinations whose range lies in a rationalised span of the top
/// eigenvectors of the numerical `Y`.
fn range_candidate(span: &[SymMatrix<Rational>], gens: &[dense::Mat], lambda: &[f64], d: usize) -> Option<Candidate> {
    let scale = lambda.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let lam: Vec<f64> = lambda.iter().map(|v| v / scale).collect();
    let mut y = dense::zeros(d);
    for (l, g) in lam.iter().zip(gens) {
        for (yr, gr) in y.iter_mut().zip(g) {
            for (a, b) in yr.iter_mut().zip(gr) {
                *a += l * b;
            }
        }
    }
    let (ev, vecs) = dense::symmetric_eigen(&y);
    let p = span.len();
    let mats: Vec<Matrix<Rational>> = span.iter().map(SymMatrix::to_matrix).collect();
    let mut best: Option<Candidate> = None;
    let mut seen: Vec<Vec<Vec<Rational>>> = Vec::new();
    for rho in (1..d).rev() {
        // only ranks at a clear eigenvalue gap
        let (inside, outside) = (ev[d - rho], ev[d - rho - 1].max(0.0));
        if !(inside > RANGE_GAP * outside) || best.as_ref().is_some_and(|b| b.rank >= rho) {
            continue;
        }
        let top: Vec<Vec<f64>> = (d - rho..d).map(|c| (0..d).map(|r| vecs[r][c]).collect()).collect();
        for tol in SNAP_TOLS {
            let Some(range) = rational_rowspace(&top, tol) else { continue };
            if seen.contains(&range) {
                continue;
            }
            seen.push(range.clone());
            let kernel = linalg::nullspace(&Matrix::from_rows(&range).ok()?);
            // Σ λ_l A_l k = 0 for every kernel vector k
            let mut eqs: Vec<Vec<Rational>> = Vec::new();
            let products: Vec<Vec<Vec<Rational>>> =
                mats.iter().map(|a| kernel.iter().map(|k| a.mul_vec(k)).collect()).collect();
            for kv in 0..kernel.len() {
                for i in 0..d {
                    eqs.push((0..p).map(|l| products[l][kv][i].clone()).collect());
                }
            }
            let family = linalg::nullspace(&Matrix::from_rows(&eqs).ok()?);
            if family.is_empty() {
                continue;
            }
            let fam: Vec<Vec<f64>> = family.iter().map(|v| v.iter().map(rational_to_f64).collect()).collect();
            let q = fam.len();
            let gram: dense::Mat = (0..q).map(|a| (0..q).map(|b| dot(&fam[a], &fam[b])).collect()).collect();
            let rhs: Vec<f64> = fam.iter().map(|v| dot(v, &lam)).collect();
            let mut trials: Vec<Vec<Rational>> = Vec::new();
            if let Some(c) = dense::solve(&gram, &rhs) {
                let cs = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if cs > 0.0 {
                    for t2 in SNAP_TOLS {
                        let snapped: Option<Vec<Rational>> = c.iter().map(|v| snap(v / cs, t2)).collect();
                        if let Some(cr) = snapped {
                            let mut comb = vec![Rational::zero(); p];
                            for (ci, v) in cr.iter().zip(&family) {
                                for (x, e) in comb.iter_mut().zip(v) {
                                    *x = x.clone() + ci.clone() * e.clone();
                                }
                            }
                            trials.push(comb);
                        }
                    }
                }
            }
            for v in &family {
                trials.push(v.clone());
                trials.push(v.iter().map(|x| -x.clone()).collect());
            }
            for coeffs in trials {
                if coeffs.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let ym = SymMatrix::combination(d, &coeffs, span);
                let inr = inertia(&ym);
                if inr.neg == 0 && inr.pos > 0 && best.as_ref().is_none_or(|b| inr.pos > b.rank) {
                    best = Some(Candidate { coeffs, y: ym, rank: inr.pos });
                }
            }
            if best.as_ref().is_some_and(|b| b.rank >= rho) {
                break;
            }
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dual_candidate(proj: &PerpProjector, w: &dense::Mat) -> Option<SymMatrix<Rational>> {
    let scale = w.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let d = w.len();
    for tol in SNAP_TOLS {
        let mut ok = true;
        let wr = SymMatrix::from_fn(d, |i, j| {
            snap((w[i][j] + w[j][i]) / (2.0 * scale), tol).unwrap_or_else(|| {
                ok = false;
                Rational::zero()
            })
        });
        if ok {
            if let Some(c) = proj.certify(&wr) {
                return Some(c);
            }
        }
    }
    None
}

/// Decides the cone alternative for `span` (nonempty, common dimension).
pub fn cone_alternative(span: &[SymMatrix<Rational>], tol: f64) -> Result<ConeResult> {
    let Some(first) = span.first() else {
        return Err(Error::InvalidArgument("cone alternative needs a nonempty span".into()));
    };
    let d = first.n();
    let proj = PerpProjector::new(span);
    if let Some(w) = proj.certify(&SymMatrix::identity(d)) {
        return Ok(ConeResult { alternative: ConeAlternative::PdInPerp { witness: w }, numerical_rank: None, heuristic: false });
    }
    // single generators of one sign
    let mut best: Option<Candidate> = None;
    for (i, a) in span.iter().enumerate() {
        let inr = inertia(a);
        let sign = if inr.neg == 0 && inr.pos > 0 {
            Rational::one()
        } else if inr.pos == 0 && inr.neg > 0 {
            -Rational::one()
        } else {
            continue;
        };
        let rank = inr.rank();
        if best.as_ref().is_none_or(|b| rank > b.rank) {
            let mut coeffs = vec![Rational::zero(); span.len()];
            coeffs[i] = sign.clone();
            best = Some(Candidate { coeffs, y: a.scale(&sign), rank });
        }
    }
    let finish = |c: Candidate, numerical_rank: Option<usize>| ConeResult {
        heuristic: c.rank < d,
        alternative: ConeAlternative::NonzeroPsdInSpan { coeffs: c.coeffs, y: c.y, rank: c.rank },
        numerical_rank,
    };
    if let Some(c) = best.take_if(|c| c.rank == d) {
        return Ok(finish(c, Some(d)));
    }

    let gens: Vec<dense::Mat> = span.iter().map(to_dense).collect();
    let mut numerical_rank = None;
    let mut dual = None;
    barrier_search(&gens, d, tol, |it| {
        numerical_rank = Some(it.numerical_rank);
        if it.t > 0.0 {
            if let Some(w) = dual_candidate(&proj, &it.dual) {
                dual = Some(w);
                return true;
            }
        }
        for c in [primal_candidate(span, &it.lambda, d), range_candidate(span, &gens, &it.lambda, d)].into_iter().flatten() {
            if best.as_ref().is_none_or(|b| c.rank > b.rank) {
                best = Some(c);
            }
        }
        best.as_ref().is_some_and(|b| b.rank == d)
    });
    if let Some(w) = dual {
        if best.is_none() {
            return Ok(ConeResult { alternative: ConeAlternative::PdInPerp { witness: w }, numerical_rank, heuristic: false });
        }
    }
    match best {
        Some(c) => Ok(finish(c, numerical_rank)),
        None => Err(Error::NumericallyAmbiguous(format!(
            "neither a PSD matrix in the span nor a PD matrix orthogonal to it could be certified (dimension {d}, {} generators)",
            span.len()
        ))),
    }
}

struct Iterate {
    /// Coefficients on the input generators.
    lambda: Vec<f64>,
    t: f64,
    /// Candidate for a PD matrix in the orthogonal complement.
    dual: dense::Mat,
    numerical_rank: usize,
}

/// Path following for `min t  s.t.  Σ μ_a E_a + t I ≻ 0,  tr(Σ μ_a E_a) = 1`
/// over an orthonormal basis `E` of the span. Calls `visit` after each
/// centering phase; stops when it returns `true`.
fn barrier_search(gens: &[dense::Mat], d: usize, tol: f64, mut visit: impl FnMut(&Iterate) -> bool) {
    // orthonormal basis with coefficients on the generators
    let p = gens.len();
    let mut basis: Vec<dense::Mat> = Vec::new();
    let mut coef: Vec<Vec<f64>> = Vec::new();
    for (b, g) in gens.iter().enumerate() {
        let gn = libm::sqrt(frob(g, g));
        if gn == 0.0 {
            continue;
        }
        let mut v: dense::Mat = g.iter().map(|r| r.iter().map(|x| x / gn).collect()).collect();
        let mut c = vec![0.0; p];
        c[b] = 1.0 / gn;
        for _ in 0..2 {
            for (e, ec) in basis.iter().zip(&coef) {
                let s = frob(&v, e);
                for (vr, er) in v.iter_mut().zip(e) {
                    for (x, y) in vr.iter_mut().zip(er) {
                        *x -= s * y;
                    }
                }
                for (x, y) in c.iter_mut().zip(ec) {
                    *x -= s * y;
                }
            }
        }
        let vn = libm::sqrt(frob(&v, &v));
        if vn > 1e-10 {
            basis.push(v.iter().map(|r| r.iter().map(|x| x / vn).collect()).collect());
            coef.push(c.iter().map(|x| x / vn).collect());
        }
    }
    let q = basis.len();
    if q == 0 {
        return;
    }
    let c: Vec<f64> = basis.iter().map(|e| (0..d).map(|i| e[i][i]).sum()).collect();
    let cc: f64 = c.iter().map(|x| x * x).sum();
    if cc < 1e-24 {
        return;
    }
    let assemble = |mu: &[f64], t: f64| -> dense::Mat {
        let mut f = dense::identity(d);
        for row in f.iter_mut() {
            for x in row.iter_mut() {
                *x *= t;
            }
        }
        for (m, e) in mu.iter().zip(&basis) {
            for (fr, er) in f.iter_mut().zip(e) {
                for (x, y) in fr.iter_mut().zip(er) {
                    *x += m * y;
                }
            }
        }
        f
    };
    let mut mu: Vec<f64> = c.iter().map(|x| x / cc).collect();
    let (ev, _) = dense::symmetric_eigen(&assemble(&mu, 0.0));
    let mut t = (-ev[0]).max(0.0) + 1.0;
    let mut eta = 1.0f64;
    let mut newton = 0usize;
    let mut stalls = 0;
    while eta < 1e14 && newton < MAX_NEWTON {
        let mut stalled = false;
        for _ in 0..100 {
            newton += 1;
            let f = assemble(&mu, t);
            let Some(l) = dense::cholesky(&f) else { stalled = true; break };
            let (finv, logdet) = dense::cholesky_inverse(&l);
            let phi = eta * t - logdet;
            let mut g = Vec::with_capacity(q + 1);
            let mut pm = Vec::with_capacity(q + 1);
            for e in &basis {
                let pe = dense::mul(&finv, e);
                g.push(-(0..d).map(|i| pe[i][i]).sum::<f64>());
                pm.push(pe);
            }
            g.push(eta - (0..d).map(|i| finv[i][i]).sum::<f64>());
            pm.push(finv.clone());
            let size = q + 2;
            let mut kkt = vec![vec![0.0; size]; size];
            for a in 0..=q {
                for b in a..=q {
                    let h = dense::trace_product(&pm[a], &pm[b]);
                    kkt[a][b] = h;
                    kkt[b][a] = h;
                }
            }
            for a in 0..q {
                kkt[a][q + 1] = c[a];
                kkt[q + 1][a] = c[a];
            }
            let mut rhs: Vec<f64> = g.iter().map(|x| -x).collect();
            rhs.push(0.0);
            let Some(step) = dense::solve(&kkt, &rhs) else { stalled = true; break };
            let dec: f64 = -g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
            if !(dec > 1e-12) {
                break;
            }
            let mut s = 1.0;
            let mut accepted = false;
            while s > 1e-14 {
                let mu2: Vec<f64> = mu.iter().zip(&step).map(|(m, dm)| m + s * dm).collect();
                let t2 = t + s * step[q];
                if let Some(l2) = dense::cholesky(&assemble(&mu2, t2)) {
                    let (_, ld2) = dense::cholesky_inverse(&l2);
                    if eta * t2 - ld2 <= phi - 0.25 * s * dec {
                        mu = mu2;
                        t = t2;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                stalled = true;
                break;
            }
            if newton >= MAX_NEWTON {
                break;
            }
        }
        stalls = if stalled { stalls + 1 } else { 0 };
        let f = assemble(&mu, t);
        let Some(l) = dense::cholesky(&f) else { return };
        let (finv, _) = dense::cholesky_inverse(&l);
        let z: dense::Mat = finv.iter().map(|r| r.iter().map(|x| x / eta).collect()).collect();
        let zc: f64 = basis.iter().zip(&c).map(|(e, ci)| frob(&z, e) * ci).sum();
        let sigma = zc / cc;
        let mut w = z.clone();
        for (i, row) in w.iter_mut().enumerate() {
            row[i] -= sigma;
        }
        for e in &basis {
            let s = frob(&w, e);
            for (wr, er) in w.iter_mut().zip(e) {
                for (x, y) in wr.iter_mut().zip(er) {
                    *x -= s * y;
                }
            }
        }
        let mut lambda = vec![0.0; p];
        for (m, cf) in mu.iter().zip(&coef) {
            for (l, x) in lambda.iter_mut().zip(cf) {
                *l += m * x;
            }
        }
        let (yev, _) = dense::symmetric_eigen(&assemble(&mu, 0.0));
        let top = yev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let numerical_rank = yev.iter().filter(|v| **v > tol * top).count();
        if visit(&Iterate { lambda, t, dual: w, numerical_rank }) {
            return;
        }
        if stalls >= 2 {
            return;
        }
        eta *= 4.0;
    }
}

/// Certificate of a facial reduction.
///
/// The output system is `A'_i = Dᵀ Tᵀ (Σ_j M_ij A_j) T D` and `B' = Dᵀ Tᵀ B T D`
/// with `M = row_ops`, `T = basis` (rational) and `D = diag(scaling)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrCertificate {
    pub k: usize,
    pub r: Vec<usize>,
    pub row_ops: Matrix<Rational>,
    pub basis: Matrix<Rational>,
    pub scaling: Vec<Float>,
    /// Maximal rank at some step was not certified.
    pub heuristic: bool,
    pub ambiguous: bool,
    /// PD matrix on the trailing block orthogonal to every remaining restricted
    /// generator, in the coordinates of the last `n − Σ r` basis columns.
    pub kernel_witness: Option<SymMatrix<Rational>>,
    /// Coefficients making the last step PD when `Σ r = n`.
    pub residual_pd_witness: Option<Vec<Rational>>,
}

impl FrCertificate {
    /// The congruence factors `[T, D]`; their product is the accumulated transform.
    pub fn congruences(&self) -> Vec<Matrix<Float>> {
        let n = self.basis.rows();
        vec![
            self.basis.map(float_from_rational),
            Matrix::from_fn(n, n, |i, j| if i == j { self.scaling[i].clone() } else { Float::zero() }),
        ]
    }

    /// Accumulated `T D` in floats.
    pub fn transform(&self) -> Matrix<Float> {
        let n = self.basis.rows();
        Matrix::from_fn(n, n, |i, j| float_from_rational(self.basis.get(i, j)) * self.scaling[j].clone())
    }

    /// Applies the certificate to `input` in 256-bit floats.
    pub fn apply(&self, input: &SdpSystem) -> Result<(Vec<SymMatrix<Float>>, SymMatrix<Float>)> {
        let m = input.m();
        if self.row_ops.rows() != m || self.basis.rows() != input.n() {
            return Err(Error::DimensionMismatch("certificate does not match the system".into()));
        }
        let t = self.transform();
        let mut a = Vec::with_capacity(m);
        for i in 0..m {
            let comb = SymMatrix::combination(input.n(), self.row_ops.row(i), input.a());
            a.push(congruence(&comb.map(float_from_rational), &t)?);
        }
        let b = congruence(&input.b().map(float_from_rational), &t)?;
        Ok((a, b))
    }

    /// Checks every claim of the certificate against `input` and `output`;
    /// returns the largest relative round-trip error.
    pub fn verify(&self, input: &SdpSystem, output: &SdpSystem) -> Result<f64> {
        if linalg::determinant(&self.row_ops).is_zero() {
            return Err(Error::Malformed("row operations are singular".into()));
        }
        if linalg::determinant(&self.basis).is_zero() {
            return Err(Error::Malformed("congruence basis is singular".into()));
        }
        let (a, b) = self.apply(input)?;
        let mut worst = 0.0f64;
        let mut compare = |x: &SymMatrix<Float>, y: &SymMatrix<Rational>| {
            for i in 0..x.n() {
                for j in i..x.n() {
                    let yv = float_from_rational(y.get(i, j));
                    let diff = Real::to_f64(&(x.get(i, j).clone() - yv.clone()).abs());
                    let mag = Real::to_f64(&yv.abs()).max(1.0);
                    worst = worst.max(diff / mag);
                }
            }
        };
        for (x, y) in a.iter().zip(output.a()) {
            compare(x, y);
        }
        compare(&b, output.b());
        if worst > ROUND_TRIP_TOL {
            return Err(Error::Malformed(format!("round-trip error {worst:e} exceeds 2^-30")));
        }
        let part = validate_regular(output);
        if part.r() != self.r.as_slice() {
            return Err(Error::Malformed(format!("output has blocks {:?}, certificate claims {:?}", part.r(), self.r)));
        }
        if let Some(w) = &self.kernel_witness {
            let n = input.n();
            let tail = n - self.r.iter().sum::<usize>();
            if w.n() != tail || !inertia(w).is_pd() {
                return Err(Error::Malformed("kernel witness is not positive definite".into()));
            }
            let nk = Matrix::from_fn(n, tail, |i, j| self.basis.get(i, n - tail + j).clone());
            let lifted = congruence(w, &nk.transpose())?;
            for (i, ai) in input.a().iter().enumerate() {
                if !ai.dot(&lifted).is_zero() {
                    return Err(Error::Malformed(format!("kernel witness is not orthogonal to A_{}", i + 1)));
                }
            }
        }
        Ok(worst)
    }
}

/// `e / sqrt(d)`, exact when `d` is the square of a rational.
fn div_sqrt(e: &Rational, d: &Rational) -> Rational {
    if e.is_zero() {
        return Rational::zero();
    }
    let (num, den) = (d.numerator().clone().unsigned_abs(), d.denominator().clone());
    let (sn, sd) = (num.sqrt(), den.sqrt());
    if &sn * &sn == num && &sd * &sd == den {
        return e.clone() / Rational::from_parts(sn.into(), sd);
    }
    simplest_rational(&(float_from_rational(e) / Real::sqrt(&float_from_rational(d))))
}

struct Step {
    complement: Vec<Vec<Rational>>,
    v: SymMatrix<Rational>,
}

fn restrict(a: &SymMatrix<Rational>, basis: &Matrix<Rational>) -> SymMatrix<Rational> {
    congruence(a, basis).expect("basis rows match the matrix dimension")
}

/// Reformulates `sys` into regular form. Returns the output system and its
/// certificate. The number of steps is not claimed to be minimal.
pub fn facial_reduction(sys: &SdpSystem, tol: f64) -> Result<(SdpSystem, FrCertificate)> {
    let (n, m) = (sys.n(), sys.m());
    let mut row_ops: Matrix<Rational> = Matrix::identity(m);
    let mut face: Matrix<Rational> = Matrix::identity(n);
    let mut steps: Vec<Step> = Vec::new();
    let mut heuristic = false;
    let mut kernel_witness = None;
    let mut residual_pd_witness = None;
    loop {
        let s = steps.len();
        let d = face.cols();
        if d == 0 {
            break;
        }
        let current: Vec<SymMatrix<Rational>> =
            (s..m).map(|i| SymMatrix::combination(n, row_ops.row(i), sys.a())).collect();
        if current.is_empty() {
            kernel_witness = Some(SymMatrix::identity(d));
            break;
        }
        let restricted: Vec<SymMatrix<Rational>> = current.iter().map(|a| restrict(a, &face)).collect();
        let res = cone_alternative(&restricted, tol)?;
        let (coeffs, y, rank) = match res.alternative {
            ConeAlternative::PdInPerp { witness } => {
                kernel_witness = Some(witness);
                break;
            }
            ConeAlternative::NonzeroPsdInSpan { coeffs, y, rank } => (coeffs, y, rank),
        };
        heuristic |= res.heuristic;
        // pivot: largest |λ_i|, lowest index on ties
        let mut pivot = 0;
        for (i, c) in coeffs.iter().enumerate() {
            if c.abs() > coeffs[pivot].abs() {
                pivot = i;
            }
        }
        let mut lam = coeffs;
        lam.swap(0, pivot);
        let mut rows: Vec<Vec<Rational>> = (0..m).map(|i| row_ops.row(i).to_vec()).collect();
        rows.swap(s, s + pivot);
        let mut new_row = vec![Rational::zero(); m];
        for (l, i) in lam.iter().zip(s..m) {
            if !l.is_zero() {
                for (x, v) in new_row.iter_mut().zip(&rows[i]) {
                    *x = x.clone() + l.clone() * v.clone();
                }
            }
        }
        rows[s] = new_row;
        row_ops = Matrix::from_rows(&rows)?;
        let v = SymMatrix::combination(n, row_ops.row(s), sys.a());
        debug_assert_eq!(restrict(&v, &face), y);
        let kernel = linalg::nullspace(&y.to_matrix());
        let new_face = face.mul(&Matrix::from_columns(d, &kernel))?;
        let cross = new_face.transpose().mul(&face)?;
        let complement: Vec<Vec<Rational>> = if new_face.cols() == 0 {
            (0..d).map(|c| face.column(c)).collect()
        } else {
            linalg::nullspace(&cross).iter().map(|z| face.mul_vec(z)).collect()
        };
        if complement.len() != rank {
            return Err(Error::Malformed(format!("complement has dimension {} for rank {rank}", complement.len())));
        }
        steps.push(Step { complement, v });
        face = new_face;
        if rank == d {
            residual_pd_witness = Some(lam);
            break;
        }
        if steps.len() == m {
            if face.cols() > 0 {
                kernel_witness = Some(SymMatrix::identity(face.cols()));
            }
            break;
        }
    }

    // V_s-orthogonal complements with their squared norms
    let mut columns: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut norms: Vec<Option<Rational>> = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(steps.len());
    for st in &steps {
        let vm = st.v.to_matrix();
        let inner = |a: &[Rational], b: &[Rational]| -> Rational {
            let vb = vm.mul_vec(b);
            a.iter().zip(&vb).fold(Rational::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
        };
        let mut ortho: Vec<(Vec<Rational>, Rational)> = Vec::new();
        for c in &st.complement {
            let mut u = c.clone();
            for (prev, dprev) in &ortho {
                let f = inner(c, prev) / dprev.clone();
                for (x, y) in u.iter_mut().zip(prev) {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
            let du = inner(&u, &u);
            if du <= Rational::zero() {
                return Err(Error::Malformed("step matrix is not positive on its complement".into()));
            }
            ortho.push((u, du));
        }
        r.push(ortho.len());
        for (u, du) in ortho {
            columns.push(u);
            norms.push(Some(du));
        }
    }
    for c in 0..face.cols() {
        columns.push(face.column(c));
        norms.push(None);
    }
    let basis = Matrix::from_columns(n, &columns);
    if linalg::determinant(&basis).is_zero() {
        return Err(Error::Malformed("accumulated congruence is singular".into()));
    }
    let one = Rational::one();
    let scaling: Vec<Float> = norms
        .iter()
        .map(|d| match d {
            Some(d) => Float::one() / Real::sqrt(&float_from_rational(d)),
            None => Float::one(),
        })
        .collect();
    let transform = |x: &SymMatrix<Rational>| -> Result<SymMatrix<Rational>> {
        let e = congruence(x, &basis)?;
        Ok(SymMatrix::from_fn(n, |i, j| {
            let di = norms[i].as_ref().unwrap_or(&one);
            let dj = norms[j].as_ref().unwrap_or(&one);
            div_sqrt(e.get(i, j), &(di.clone() * dj.clone()))
        }))
    };
    let mut a_out = Vec::with_capacity(m);
    for i in 0..m {
        a_out.push(transform(&SymMatrix::combination(n, row_ops.row(i), sys.a()))?);
    }
    let b_out = transform(sys.b())?;
    let out = SdpSystem::new(a_out, b_out, None, format!("{} (regular form)", sys.label()))?;
    let cert = FrCertificate {
        k: steps.len(),
        r,
        row_ops,
        basis,
        scaling,
        heuristic,
        ambiguous: false,
        kernel_witness,
        residual_pd_witness,
    };
    Ok((out, cert))
}

/// Number of facial reduction steps found by [`facial_reduction`].
pub fn singularity_degree(sys: &SdpSystem, tol: f64) -> Result<usize> {
    facial_reduction(sys, tol).map(|(_, c)| c.k)
}
