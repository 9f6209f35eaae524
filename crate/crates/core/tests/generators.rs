use khier_core::generators::*;
use khier_core::hierarchy::{derive_quadratics, exponents_fourier_motzkin, exponents_recursion, magnitude_gap, QuadraticKind};
use khier_core::instance::{tail_indices, validate_regular, SdpSystem};
use khier_core::scalar::{format_rational, Rational};
use khier_core::symmat::{definiteness_rational, Definiteness};

fn analyze(sys: &SdpSystem) -> (Vec<usize>, Vec<usize>, Vec<String>) {
    let part = validate_regular(sys);
    let t = tail_indices(sys, &part).unwrap();
    let h = exponents_recursion(&t.tails).unwrap();
    (part.r().to_vec(), t.tails.as_slice().to_vec(), h.alpha().iter().map(format_rational).collect())
}

fn q(v: i64) -> Rational {
    Rational::from(v)
}

#[test]
fn family_structure() {
    let cases: Vec<(SdpSystem, usize, &[usize], &[&str])> = vec![
        (gen_khachiyan(4).unwrap(), 5, &[5, 5, 5], &["2", "2", "2"]),
        (gen_exact_khachiyan(3).unwrap(), 5, &[4, 4], &["2", "2"]),
        (gen_mild(4).unwrap(), 5, &[3, 4, 5], &["4/3", "3/2", "2"]),
        (gen_mild(6).unwrap(), 7, &[3, 4, 5, 6, 7], &["6/5", "5/4", "4/3", "3/2", "2"]),
        (gen_perturbed_khachiyan().unwrap(), 4, &[4, 4], &["2", "2"]),
        (gen_polyopt(&[1, 0, 0, 0, 0, 0, 1].map(q)).unwrap().system, 4, &[3, 4], &["3/2", "2"]),
        (gen_odonnell(3).unwrap(), 7, &[4, 4], &["2", "2"]),
        (gen_from_tails(&[4, 4, 5]).unwrap(), 5, &[4, 4, 5], &["5/3", "3/2", "2"]),
    ];
    for (sys, n, tails, alpha) in cases {
        let (r, t, a) = analyze(&sys);
        assert_eq!(sys.n(), n, "{}", sys.label());
        assert_eq!(r, vec![1; tails.len() + 1], "{}", sys.label());
        assert_eq!(t, tails, "{}", sys.label());
        assert_eq!(a, alpha, "{}", sys.label());
    }
}

#[test]
fn khachiyan_hierarchies_are_all_two() {
    for m in 2..=8 {
        let sys = gen_khachiyan(m).unwrap();
        let part = validate_regular(&sys);
        assert_eq!(part.k(), m);
        let t = tail_indices(&sys, &part).unwrap();
        let h = exponents_fourier_motzkin(&t.tails).unwrap();
        assert!(h.alpha().iter().all(|a| *a == q(2)));
        assert_eq!(magnitude_gap(&h), q(1 << (m - 1)));
    }
}

fn quadratic_values(sys: &SdpSystem, x: &[i64]) -> Vec<(QuadraticKind, Rational)> {
    let part = validate_regular(sys);
    let quads = derive_quadratics(sys, &part, &tail_indices(sys, &part).unwrap()).unwrap();
    let x: Vec<f64> = x.iter().map(|v| *v as f64).collect();
    quads.iter().map(|p| (p.kind, Rational::try_from(p.evaluate(&x)).unwrap())).collect()
}

#[test]
fn derived_quadratics_match_closed_forms() {
    use QuadraticKind::*;
    // x_1 − x_2², x_2 − x_3², x_3 − x_4² at (20, 4, 3, 1)
    assert_eq!(
        quadratic_values(&gen_khachiyan(4).unwrap(), &[20, 4, 3, 1]),
        vec![(Type2, q(4)), (Type2, q(-5)), (Type2, q(2))]
    );
    // x_1x_3 − x_2², x_2x_4 − x_3², x_3 − x_4² at (5, 3, 2, 1)
    assert_eq!(
        quadratic_values(&gen_mild(4).unwrap(), &[5, 3, 2, 1]),
        vec![(Type1, q(1)), (Type1, q(-1)), (Type2, q(1))]
    );
    // (x_1 − 2x_2) − (x_2 − x_3)², (x_2 + x_3) − x_3² at (30, 5, 2)
    assert_eq!(
        quadratic_values(&gen_perturbed_khachiyan().unwrap(), &[30, 5, 2]),
        vec![(Type2, q(11)), (Type2, q(3))]
    );
}

#[test]
fn khachiyan_separating_point() {
    let x = [256, 16, 4, 2].map(q);
    let quads = quadratic_values(&gen_khachiyan(4).unwrap(), &[256, 16, 4, 2]);
    assert!(quads.iter().all(|(_, v)| *v >= q(0)));
    let kh = gen_khachiyan(4).unwrap();
    assert_eq!(definiteness_rational(&kh.evaluate(&x).unwrap(), 0.0), Definiteness::Indefinite);
    let ex = gen_exact_khachiyan(4).unwrap();
    assert_ne!(definiteness_rational(&ex.evaluate(&x).unwrap(), 0.0), Definiteness::Indefinite);
    // (16, 8, 4) violates 16 ≥ 8²
    let ex3 = gen_exact_khachiyan(3).unwrap();
    assert_eq!(definiteness_rational(&ex3.evaluate(&[16, 8, 4].map(q)).unwrap(), 0.0), Definiteness::Indefinite);
    assert_ne!(definiteness_rational(&gen_exact_khachiyan(2).unwrap().evaluate(&[4, 2].map(q)).unwrap(), 0.0), Definiteness::Indefinite);
}

#[test]
fn odonnell_boundary_chain() {
    let sys = gen_odonnell(3).unwrap();
    let s = sys.evaluate(&[256, 16, 4].map(q)).unwrap();
    assert_eq!(definiteness_rational(&s, 0.0), Definiteness::Psd);
    let s = sys.evaluate(&[256, 16, 3].map(q)).unwrap();
    assert_eq!(definiteness_rational(&s, 0.0), Definiteness::Indefinite);
}

#[test]
fn polyopt_moment_curve_is_feasible() {
    let p = gen_polyopt(&[1, 0, 0, 0, 0, 0, 1].map(q)).unwrap();
    for xbar in [-3i64, -1, 0, 2, 5] {
        let y: Vec<Rational> = (1..=6).map(|i| (0..i).fold(q(1), |a, _| a * q(xbar))).collect();
        let s = p.system.evaluate(&polyopt_variables(&y)).unwrap();
        assert_ne!(definiteness_rational(&s, 0.0), Definiteness::Indefinite, "xbar = {xbar}");
    }
}

#[test]
fn family_specs_build() {
    for f in Family::ALL {
        let spec = FamilySpec { family: f, size: 3, coeffs: None };
        let sys = spec.build().unwrap();
        assert!(validate_regular(&sys).k() >= 2, "{}", f.name());
        assert_eq!(Family::from_name(f.name()), Some(f));
    }
    assert!(gen_from_tails(&[2, 4, 5]).is_err());
}
