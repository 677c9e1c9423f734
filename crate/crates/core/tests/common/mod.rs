#![allow(dead_code)]

use frametk::linalg::VectorFamily;
use frametk::{CMatrix, CVector, Complex64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn crand(r: &mut ChaCha8Rng) -> Complex64 {
    c(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0)
}

pub fn random_matrix(r: &mut ChaCha8Rng, m: usize, n: usize) -> CMatrix {
    CMatrix::from_fn(m, n, |_, _| crand(r))
}

pub fn random_family(r: &mut ChaCha8Rng, m: usize, n: usize) -> VectorFamily {
    VectorFamily::from_matrix(random_matrix(r, m, n)).unwrap()
}

pub fn random_vector(r: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| crand(r))
}

/// `e_i` in dimension `m`.
pub fn e(m: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(m);
    v[i] = c(1.0, 0.0);
    v
}

/// Oracle inner product, linear in the first slot.
pub fn inner(x: &CVector, y: &CVector) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// Family of `n` vectors in dimension `m`, entries in the unit square.
pub fn family_strategy(max_m: usize, max_n: usize) -> impl Strategy<Value = VectorFamily> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m * n).prop_map(move |vals| {
            let mat = CMatrix::from_fn(m, n, |r, col| {
                let (re, im) = vals[col * m + r];
                c(re, im)
            });
            VectorFamily::from_matrix(mat).unwrap()
        })
    })
}

/// Families with at most as many vectors as dimensions, nudged towards independence.
pub fn riesz_strategy(max_n: usize) -> impl Strategy<Value = VectorFamily> {
    (1..=max_n).prop_flat_map(|n| {
        (n..=n + 3).prop_flat_map(move |m| {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m * n).prop_map(move |vals| {
                let mat = CMatrix::from_fn(m, n, |r, col| {
                    let (re, im) = vals[col * m + r];
                    c(re, im) + if r == col { c(2.0, 0.0) } else { c(0.0, 0.0) }
                });
                VectorFamily::from_matrix(mat).unwrap()
            })
        })
    })
}
