use khier_core::generators::{gen_khachiyan, gen_mild, gen_polyopt, gen_perturbed_khachiyan};
use khier_core::instance::{validate_regular, SdpSystem};
use khier_core::reduce::{facial_reduction, DEFAULT_TOL};
use khier_core::scalar::Rational;
use khier_core::symmat::{congruence, Matrix, SymMatrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn q(v: i64) -> Rational {
    Rational::from(v)
}

/// Random integer unit-triangular factor times a permutation.
fn unimodular(n: usize, rng: &mut StdRng, lower: bool) -> Matrix<Rational> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let tri = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            q(1)
        } else if (lower && i > j) || (!lower && i < j) {
            q(rng.gen_range(-2..=2))
        } else {
            q(0)
        }
    });
    let p = Matrix::from_fn(n, n, |i, j| if perm[i] == j { q(1) } else { q(0) });
    tri.mul(&p).unwrap()
}

fn scramble(sys: &SdpSystem, seed: u64) -> SdpSystem {
    let mut rng = StdRng::seed_from_u64(seed);
    let (n, m) = (sys.n(), sys.m());
    let rows = unimodular(m, &mut rng, true);
    let t = unimodular(n, &mut rng, false);
    let a: Vec<SymMatrix<Rational>> = (0..m)
        .map(|i| congruence(&SymMatrix::combination(n, rows.row(i), sys.a()), &t).unwrap())
        .collect();
    let b = congruence(sys.b(), &t).unwrap();
    SdpSystem::new(a, b, Some(Vec::new()), "scrambled").unwrap()
}

fn check(sys: &SdpSystem, seeds: std::ops::Range<u64>) {
    let want = validate_regular(sys);
    for seed in seeds {
        let s = scramble(sys, seed);
        let (out, cert) = facial_reduction(&s, DEFAULT_TOL).unwrap();
        assert_eq!(cert.r, want.r(), "seed {seed}");
        assert_eq!(cert.k, want.k(), "seed {seed}");
        let err = cert.verify(&s, &out).unwrap();
        assert!(err < 2f64.powi(-30));
    }
}

#[test]
fn recovers_khachiyan() {
    for m in 2..=5 {
        check(&gen_khachiyan(m).unwrap(), 0..4);
    }
}

#[test]
fn recovers_mild() {
    check(&gen_mild(4).unwrap(), 0..4);
}

#[test]
fn recovers_perturbed_khachiyan() {
    check(&gen_perturbed_khachiyan().unwrap(), 0..4);
}

#[test]
fn recovers_polyopt() {
    let p = gen_polyopt(&[q(1), q(0), q(0), q(0), q(0), q(0), q(1)]).unwrap();
    check(&p.system, 0..4);
}

#[test]
fn identity_first_matrix_takes_one_step() {
    let n = 3;
    let a = vec![SymMatrix::identity(n), SymMatrix::unit(n, 0, 1)];
    let sys = SdpSystem::new(a, SymMatrix::zeros(n), None, "id").unwrap();
    let (out, cert) = facial_reduction(&sys, DEFAULT_TOL).unwrap();
    assert_eq!(cert.k, 1);
    assert_eq!(cert.r, vec![3]);
    assert!(cert.residual_pd_witness.is_some());
    cert.verify(&sys, &out).unwrap();
}

#[test]
fn recovered_blocks_are_unit() {
    let sys = gen_khachiyan(8).unwrap();
    let start = std::time::Instant::now();
    let s = scramble(&sys, 11);
    let (out, cert) = facial_reduction(&s, DEFAULT_TOL).unwrap();
    assert_eq!(cert.r, vec![1; 8]);
    cert.verify(&s, &out).unwrap();
    eprintln!("khachiyan(8): {:?}", start.elapsed());
}

#[test]
fn irrational_face_is_ambiguous() {
    let r = |p: i64, q: u64| Rational::from_parts(p.into(), q.into());
    let mut a1 = SymMatrix::zeros(4);
    a1.set(0, 0, q(1));
    a1.set(1, 1, q(2));
    a1.set(2, 3, q(1));
    let mut a2 = SymMatrix::zeros(4);
    a2.set(0, 1, q(1));
    a2.set(2, 2, q(1));
    a2.set(3, 3, r(1, 2));
    let err = khier_core::reduce::cone_alternative(&[a1, a2], DEFAULT_TOL).unwrap_err();
    assert!(matches!(err, khier_core::Error::NumericallyAmbiguous(_)));
}

#[test]
fn row_operations_do_not_change_the_outcome() {
    let base = gen_mild(4).unwrap();
    let plain = facial_reduction(&base, DEFAULT_TOL).unwrap().1;
    for seed in 20..24 {
        let (_, cert) = facial_reduction(&scramble(&base, seed), DEFAULT_TOL).unwrap();
        assert_eq!((cert.k, cert.r.clone()), (plain.k, plain.r.clone()));
    }
}
