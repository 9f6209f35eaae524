#![allow(dead_code)]

use khier_core::instance::SdpSystem;
use khier_core::scalar::Rational;
use khier_core::symmat::{congruence, Matrix, SymMatrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Integer unit-triangular matrix times a random permutation.
pub fn unimodular(n: usize, rng: &mut StdRng, lower: bool) -> Matrix<Rational> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let tri = Matrix::from_fn(n, n, |i, j| {
        let v = if i == j {
            1
        } else if (lower && i > j) || (!lower && i < j) {
            rng.gen_range(-2..=2)
        } else {
            0
        };
        Rational::from(v)
    });
    let p = Matrix::from_fn(n, n, |i, j| Rational::from((perm[i] == j) as i64));
    tri.mul(&p).unwrap()
}

/// Hides the regular form of `sys` behind random row operations and a
/// random integer congruence.
pub fn scramble(sys: &SdpSystem, seed: u64) -> SdpSystem {
    let mut rng = StdRng::seed_from_u64(seed);
    let (n, m) = (sys.n(), sys.m());
    let rows = unimodular(m, &mut rng, true);
    let t = unimodular(n, &mut rng, false);
    let a: Vec<SymMatrix<Rational>> = (0..m)
        .map(|i| congruence(&SymMatrix::combination(n, rows.row(i), sys.a()), &t).unwrap())
        .collect();
    let b = congruence(sys.b(), &t).unwrap();
    SdpSystem::new(a, b, None, format!("{} (scrambled, seed {seed})", sys.label())).unwrap()
}
