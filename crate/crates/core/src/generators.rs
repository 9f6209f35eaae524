//! Instance families in regular form with known structure.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::SdpSystem;
use crate::scalar::{format_rational, Rational, Scalar};
use crate::symmat::SymMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Khachiyan,
    ExactKhachiyan,
    Mild,
    PerturbedKhachiyan,
    Polyopt,
    Odonnell,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Khachiyan,
        Family::ExactKhachiyan,
        Family::Mild,
        Family::PerturbedKhachiyan,
        Family::Polyopt,
        Family::Odonnell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Khachiyan => "khachiyan",
            Family::ExactKhachiyan => "exact-khachiyan",
            Family::Mild => "mild",
            Family::PerturbedKhachiyan => "perturbed-khachiyan",
            Family::Polyopt => "polyopt",
            Family::Odonnell => "odonnell",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// A family together with its size parameter and optional coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub size: usize,
    pub coeffs: Option<Vec<Rational>>,
}

impl FamilySpec {
    pub fn build(&self) -> Result<SdpSystem> {
        if self.family != Family::PerturbedKhachiyan && self.family != Family::Polyopt && self.size < 2 {
            return Err(Error::InvalidArgument(format!("{} needs size >= 2", self.family.name())));
        }
        match self.family {
            Family::Khachiyan => gen_khachiyan(self.size),
            Family::ExactKhachiyan => gen_exact_khachiyan(self.size),
            Family::Mild => gen_mild(self.size),
            Family::PerturbedKhachiyan => gen_perturbed_khachiyan(),
            Family::Odonnell => gen_odonnell(self.size),
            Family::Polyopt => {
                let coeffs = match &self.coeffs {
                    Some(c) => c.clone(),
                    None => {
                        // x^{2n} + 1 by default
                        let mut c = vec![Rational::zero(); 2 * self.size + 1];
                        c[0] = Rational::one();
                        c[2 * self.size] = Rational::one();
                        c
                    }
                };
                gen_polyopt(&coeffs).map(|p| p.system)
            }
        }
    }
}

fn unit(n: usize, i: usize, j: usize) -> SymMatrix<Rational> {
    SymMatrix::unit(n, i - 1, j - 1)
}

fn add_entry(m: &mut SymMatrix<Rational>, i: usize, j: usize, v: i64) {
    let cur = m.get(i - 1, j - 1).clone();
    m.set(i - 1, j - 1, cur + Rational::from(v));
}

/// `x_1..x_m` on the diagonal, `1` in the last diagonal cell, and `x_{i}`
/// at `(i−1, m+1)`, so that the 2×2 minors read `x_{i−1} ≥ x_i²`.
pub fn gen_khachiyan(m: usize) -> Result<SdpSystem> {
    if m < 2 {
        return Err(Error::InvalidArgument("khachiyan needs m >= 2".into()));
    }
    let n = m + 1;
    let mut a = vec![unit(n, 1, 1)];
    for i in 2..=m {
        let mut ai = unit(n, i, i);
        add_entry(&mut ai, i - 1, n, 1);
        a.push(ai);
    }
    SdpSystem::new(a, unit(n, n, n), Some(vec![]), format!("khachiyan-{m}"))
}

/// Block-diagonal system with 2×2 blocks `[[x_{i−1}, x_i], [x_i, 1]]` and the
/// 1×1 block `x_m − 2`, laid out so that the variable cells come first
/// (positions `1..m`) and the unit cells after (`m+1..2m−1`).
pub fn gen_exact_khachiyan(m: usize) -> Result<SdpSystem> {
    if m < 2 {
        return Err(Error::InvalidArgument("exact khachiyan needs m >= 2".into()));
    }
    let n = 2 * m - 1;
    let mut a = vec![unit(n, 1, 1)];
    for i in 2..=m {
        let mut ai = unit(n, i, i);
        add_entry(&mut ai, i - 1, m + i - 1, 1);
        a.push(ai);
    }
    let mut b = SymMatrix::zeros(n);
    add_entry(&mut b, m, m, -2);
    for i in m + 1..=n {
        add_entry(&mut b, i, i, 1);
    }
    SdpSystem::new(a, b, Some(vec![]), format!("exact-khachiyan-{m}"))
}

/// Chain `x_j x_{j+2} ≥ x_{j+1}²`: `x_{j+1}` sits at `(j, j+2)`.
pub fn gen_mild(k: usize) -> Result<SdpSystem> {
    if k < 3 {
        return Err(Error::InvalidArgument("mild needs k >= 3".into()));
    }
    let mut sys = gen_from_tails(&(1..k).map(|j| j + 2).collect::<Vec<_>>())?;
    sys = sys.with_label(format!("mild-{k}"));
    Ok(sys)
}

/// Regular system with unit blocks and prescribed tails `t_2..t_k`:
/// `A_1 = E_11`, `A_{j+1} = E_{j+1,j+1} + E_{j,t_{j+1}}`, `B = E_{k+1,k+1}`.
pub fn gen_from_tails(tails: &[usize]) -> Result<SdpSystem> {
    let k = tails.len() + 1;
    let n = k + 1;
    for (idx, &t) in tails.iter().enumerate() {
        let j = idx + 1;
        if t < j + 2 || t > k + 1 {
            return Err(Error::InvalidTails(format!("t_{} = {t} must lie in {}..={}", j + 1, j + 2, k + 1)));
        }
    }
    let mut a = vec![unit(n, 1, 1)];
    for (idx, &t) in tails.iter().enumerate() {
        let j = idx + 1;
        let mut aj = unit(n, j + 1, j + 1);
        add_entry(&mut aj, j, t, 1);
        a.push(aj);
    }
    let label = format!(
        "tails-{}",
        tails.iter().map(|t| format!("{t}")).collect::<Vec<_>>().join("-")
    );
    SdpSystem::new(a, unit(n, n, n), Some(vec![]), label)
}

/// The 4×4 system
/// `[[x1 − 2x2, 0, 0, x2 − x3], [0, x2 + x3, 0, x3], [0, 0, x3, 0], [x2 − x3, x3, 0, 1]]`.
pub fn gen_perturbed_khachiyan() -> Result<SdpSystem> {
    let n = 4;
    let a1 = unit(n, 1, 1);
    let mut a2 = SymMatrix::zeros(n);
    add_entry(&mut a2, 1, 1, -2);
    add_entry(&mut a2, 1, 4, 1);
    add_entry(&mut a2, 2, 2, 1);
    let mut a3 = SymMatrix::zeros(n);
    add_entry(&mut a3, 1, 4, -1);
    add_entry(&mut a3, 2, 2, 1);
    add_entry(&mut a3, 2, 4, 1);
    add_entry(&mut a3, 3, 3, 1);
    SdpSystem::new(vec![a1, a2, a3], unit(n, n, n), Some(vec![]), "perturbed-khachiyan")
}

/// A polynomial-optimisation moment system and its objective.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyoptInstance {
    pub system: SdpSystem,
    /// Coefficients `a_0..a_{2n}` of `f(x) = Σ a_i x^i`.
    pub objective: Vec<Rational>,
}

/// Moment system `M(y) ⪰ 0` for minimising `Σ a_i y_i` over degree-`2n`
/// univariate moments, in regular form.
///
/// The Hankel matrix is reversed so entry `(a, b)` (1-based) holds
/// `y_{2n+2−a−b}`, with `y_0 = 1` in `B`. Variables are renamed even moments
/// first: `x_i = y_{2n+2−2i}` and `x_{n+i} = y_{2n+1−2i}` for `i = 1..n`, so
/// `A_i = Σ_{a+b=2i} E_ab`. The odd moments form the fixed tail, zero by
/// default.
pub fn gen_polyopt(coeffs: &[Rational]) -> Result<PolyoptInstance> {
    if coeffs.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "polyopt needs an even-degree polynomial (odd-length coefficient list), got {} coefficients",
            coeffs.len()
        )));
    }
    let n = (coeffs.len() - 1) / 2;
    if n < 2 {
        return Err(Error::InvalidArgument("polyopt needs degree >= 4".into()));
    }
    if coeffs[2 * n] <= Rational::zero() {
        return Err(Error::InvalidArgument("polyopt needs a positive leading coefficient".into()));
    }
    let dim = n + 1;
    let hankel = |s: usize| -> SymMatrix<Rational> {
        SymMatrix::from_fn(dim, |i, j| if i + j + 2 == s { Rational::one() } else { Rational::zero() })
    };
    let mut a = Vec::with_capacity(2 * n);
    for i in 1..=n {
        a.push(hankel(2 * i));
    }
    for i in 1..=n {
        a.push(hankel(2 * i + 1));
    }
    let b = hankel(2 * n + 2);
    let label = format!(
        "polyopt-{}",
        coeffs.iter().map(format_rational).collect::<Vec<String>>().join(",")
    );
    let system = SdpSystem::new(a, b, Some(vec![Rational::zero(); n]), label)?;
    Ok(PolyoptInstance { system, objective: coeffs.to_vec() })
}

/// Maps moments `y_1..y_{2n}` (0-based slice, `y[i-1] = y_i`) to the
/// variables of [`gen_polyopt`].
pub fn polyopt_variables<T: Clone>(y: &[T]) -> Vec<T> {
    let n = y.len() / 2;
    let mut x = Vec::with_capacity(2 * n);
    for i in 1..=n {
        x.push(y[2 * n + 2 - 2 * i - 1].clone());
    }
    for i in 1..=n {
        x.push(y[2 * n + 1 - 2 * i - 1].clone());
    }
    x
}

/// `(2n+1)`-dimensional system with `A_1 = E_11`,
/// `A_i = E_ii − E_{i−1,n+i−1}` and `B = −2E_{n,2n} + Σ_{i=n+1}^{2n} E_ii`.
pub fn gen_odonnell(n: usize) -> Result<SdpSystem> {
    if n < 2 {
        return Err(Error::InvalidArgument("odonnell needs n >= 2".into()));
    }
    let dim = 2 * n + 1;
    let mut a = vec![unit(dim, 1, 1)];
    for i in 2..=n {
        let mut ai = unit(dim, i, i);
        add_entry(&mut ai, i - 1, n + i - 1, -1);
        a.push(ai);
    }
    let mut b = SymMatrix::zeros(dim);
    add_entry(&mut b, n, 2 * n, -2);
    for i in n + 1..=2 * n {
        add_entry(&mut b, i, i, 1);
    }
    SdpSystem::new(a, b, Some(vec![]), format!("odonnell-{n}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate_regular;

    #[test]
    fn khachiyan_layout() {
        let sys = gen_khachiyan(4).unwrap();
        assert_eq!(sys.n(), 5);
        assert_eq!(sys.a()[1].triplets().len(), 2);
        assert!(!sys.a()[1].get(0, 4).is_zero());
        assert_eq!(validate_regular(&sys).r(), &[1, 1, 1, 1]);
    }

    #[test]
    fn polyopt_variable_map() {
        // y = (y1..y6) = (1..6): x = (y6, y4, y2, y5, y3, y1)
        let x = polyopt_variables(&[1, 2, 3, 4, 5, 6]);
        assert_eq!(x, vec![6, 4, 2, 5, 3, 1]);
    }

    #[test]
    fn polyopt_rejects_bad_coefficients() {
        let c = |v: &[i64]| v.iter().map(|&x| Rational::from(x)).collect::<Vec<_>>();
        assert!(gen_polyopt(&c(&[1, 0, 0, 1])).is_err());
        assert!(gen_polyopt(&c(&[1, 0, 0, 0, -1])).is_err());
        assert!(gen_polyopt(&c(&[1, 0, 1])).is_err());
        assert_eq!(gen_polyopt(&c(&[1, 0, 0, 0, 0, 0, 1])).unwrap().system.n(), 4);
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(Family::from_name(f.name()), Some(f));
        }
    }
}
