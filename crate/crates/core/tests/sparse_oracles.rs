use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use richardson_core::mtx::{load_matrix_market, write_matrix_market};
use richardson_core::{jacobi_split, laplacian_2d, SparseMatrix};

fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a.get(i, j))
}

fn jacobi_t(m: usize) -> SparseMatrix {
    let sys = jacobi_split(&laplacian_2d(m).unwrap(), &vec![0.0; m * m]).unwrap();
    sys.matrix().identity_minus_scaled(1.0).unwrap()
}

#[test]
fn jacobi_eigenvalues_match_closed_form() {
    for m in 1..=12 {
        let t = dense(&jacobi_t(m));
        let mut computed: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
        let c = |i: usize| (i as f64 * PI / (m + 1) as f64).cos();
        let mut expected: Vec<f64> = (1..=m)
            .flat_map(|i| (1..=m).map(move |j| 0.5 * (c(i) + c(j))))
            .collect();
        computed.sort_by(f64::total_cmp);
        expected.sort_by(f64::total_cmp);
        for (a, b) in computed.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10, "m={m}: {a} vs {b}");
        }
    }
}

#[test]
fn jacobi_iteration_matrix_is_nonnegative_with_zero_diagonal() {
    for m in [1, 2, 5, 17] {
        let t = jacobi_t(m);
        for (i, j, v) in t.triplets() {
            assert!(v >= 0.0, "m={m} T[{i},{j}] = {v}");
            if i == j {
                assert_eq!(v, 0.0);
            }
        }
    }
}

#[test]
fn laplacian_is_exactly_symmetric() {
    for m in [1, 3, 8, 20] {
        let a = laplacian_2d(m).unwrap();
        for (i, j, v) in a.triplets() {
            assert_eq!(a.get(j, i), v);
        }
    }
}

fn sparse_matrix(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (1..=max_n).prop_flat_map(|n| {
        let entry = (0..n, 0..n, -10.0..10.0f64);
        (Just(n), prop::collection::vec(entry, 0..4 * n))
    })
}

proptest! {
    #[test]
    fn matvec_matches_dense(
        (n, entries, x) in sparse_matrix(50).prop_flat_map(|(n, e)| {
            (Just(n), Just(e), prop::collection::vec(-1.0..1.0f64, n))
        })
    ) {
        let a = SparseMatrix::from_triplets(n, n, entries.iter().copied()).unwrap();
        let y = a.matvec(&x).unwrap();
        let reference = dense(&a) * DVector::from_column_slice(&x);
        let scale = dense(&a).abs() * DVector::from_iterator(n, x.iter().map(|v| v.abs()));
        for i in 0..n {
            prop_assert!((y[i] - reference[i]).abs() <= 1e-14 * scale[i].max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn matrix_market_round_trip((n, entries) in sparse_matrix(20)) {
        let a = SparseMatrix::from_triplets(n, n, entries.iter().copied()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        write_matrix_market(&a, &path).unwrap();
        let b = load_matrix_market(&path).unwrap();
        prop_assert_eq!(dense(&a), dense(&b));
    }

    #[test]
    fn csr_structure_is_canonical((n, entries) in sparse_matrix(30)) {
        let a = SparseMatrix::from_triplets(n, n, entries.iter().copied()).unwrap();
        let rs = a.row_start();
        prop_assert_eq!(rs[0], 0);
        prop_assert_eq!(rs[n], a.nnz());
        for i in 0..n {
            prop_assert!(rs[i] <= rs[i + 1]);
            let (cols, _) = a.row(i);
            prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(cols.iter().all(|&j| j < n));
        }
    }
}
