//! Exact ranks against a floating-point SVD of the complex embedding.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use thetanz_core::cyclotomic::{exact_rank, CycloMatrix, CycloNumber, RootMatrix};
use thetanz_core::theta_matrix::{self, EpsilonContext};

fn svd_rank(rows: usize, cols: usize, entries: &[Complex64]) -> usize {
    let m = DMatrix::from_row_slice(rows, cols, entries);
    let sv = m.svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > top * 1e-9).count()
}

fn root_embedding(m: &RootMatrix) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(m.rows() * m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.push(match m.get(i, j) {
                Some(e) => Complex64::from_polar(1.0, std::f64::consts::TAU * e as f64 / m.order() as f64),
                None => Complex64::new(0.0, 0.0),
            });
        }
    }
    out
}

fn cyclo_embedding(m: &CycloMatrix) -> Vec<Complex64> {
    m.entries().iter().map(CycloNumber::embed).collect()
}

#[test]
fn class_matrix_ranks_match_svd() {
    for m in [1u64, 3, 5, 7, 15, 21, 33, 35] {
        for m1 in thetanz_core::arith::divisors(m) {
            let m2 = m / m1;
            let ctx = EpsilonContext::new(m1, m1, m2, None).unwrap();
            for class in theta_matrix::coprime_square_classes(m1, m2) {
                let roots = theta_matrix::class_matrix_roots(&ctx, class.nu0 as i64).unwrap();
                let svd = svd_rank(roots.rows(), roots.cols(), &root_embedding(&roots));
                assert_eq!(roots.rank(), svd, "m1 = {m1}, m2 = {m2}, ν0 = {}", class.nu0);
                assert_eq!(exact_rank(&roots.to_cyclo()), svd);
            }
        }
    }
}

#[test]
fn even_split_rank_drop_matches_svd() {
    let ctx = EpsilonContext::new(1, 1, 2, Some(1)).unwrap();
    let roots = theta_matrix::class_matrix_roots(&ctx, 1).unwrap();
    assert_eq!(svd_rank(roots.rows(), roots.cols(), &root_embedding(&roots)), 1);
    assert_eq!(roots.rank(), 1);
}

fn root_matrix() -> impl Strategy<Value = RootMatrix> {
    (prop::sample::select(vec![3u64, 4, 5, 6, 8, 12]), 1usize..4, 1usize..4).prop_flat_map(|(n, r, c)| {
        prop::collection::vec(prop::option::weighted(0.8, 0..n), r * c)
            .prop_map(move |e| RootMatrix::new(n, r, c, e))
    })
}

/// `U·V` with `U` of size `r×k` and `V` of size `k×c`, so the rank is at most
/// `k`; entries are sparse integer combinations of roots of unity.
fn low_rank_matrix() -> impl Strategy<Value = CycloMatrix> {
    (prop::sample::select(vec![3u64, 4, 5, 7, 8, 12, 15, 24, 40, 60]), 1usize..9, 1usize..9, 1usize..9).prop_flat_map(
        |(n, r, c, k)| {
            let coeffs = prop::collection::vec(prop::sample::select(vec![0i64, 0, 0, 1, -1, 2]), n as usize);
            (
                prop::collection::vec(coeffs.clone(), r * k),
                prop::collection::vec(coeffs, k * c),
            )
                .prop_map(move |(u, v)| {
                    let num = |d: &Vec<i64>| CycloNumber::from_dense_integers(n, d.clone()).unwrap();
                    CycloMatrix::from_fn(n, r, c, |i, j| {
                        (0..k).fold(CycloNumber::zero(n).unwrap(), |acc, t| acc + num(&u[i * k + t]) * num(&v[t * c + j]))
                    })
                    .unwrap()
                })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn root_matrix_rank_matches_svd(m in root_matrix()) {
        prop_assert_eq!(m.rank(), svd_rank(m.rows(), m.cols(), &root_embedding(&m)));
    }

    #[test]
    fn kronecker_rank_is_multiplicative(a in root_matrix(), b in root_matrix()) {
        let k = a.kronecker(&b);
        prop_assert_eq!(k.rank(), a.rank() * b.rank());
    }

    #[test]
    fn exact_rank_matches_svd(m in low_rank_matrix()) {
        prop_assert_eq!(exact_rank(&m), svd_rank(m.rows(), m.cols(), &cyclo_embedding(&m)));
    }
}
