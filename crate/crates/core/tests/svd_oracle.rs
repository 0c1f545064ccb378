mod support;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dwe::embedding::embed;
use dwe::sparse::CsrMatrix;
use dwe::svd::{truncated_svd, SvdParams};
use support::{oracle, random};

fn sparse(seed: u64, m: usize, n: usize, density: f64) -> (CsrMatrix, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = random::sparse_table(&mut rng, m, n, density);
    let dense = DMatrix::from_fn(m, n, |i, j| table[i][j]);
    (CsrMatrix::from_dense(&dense), table)
}

/// Matrix with a prescribed spectrum: random orthonormal factors around `sv`.
fn with_spectrum(seed: u64, m: usize, n: usize, sv: &[f64]) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = sv.len();
    let u = DMatrix::from_fn(m, r, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
    let v = DMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
    u * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(sv)) * v.transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factors_are_orthonormal_and_gram_matches(seed in any::<u64>(), m in 5usize..40, n in 5usize..40, d in 1usize..5) {
        let (x, _) = sparse(seed, m, n, 0.4);
        prop_assume!(x.nnz() > 0);
        let r = truncated_svd(&x, d, seed, SvdParams::default()).unwrap();
        let d = r.d;
        prop_assert!((r.u.transpose() * &r.u - DMatrix::identity(d, d)).abs().max() < 1e-10);
        prop_assert!((r.v.transpose() * &r.v - DMatrix::identity(d, d)).abs().max() < 1e-10);
        prop_assert!(r.sigma.windows(2).all(|w| w[0] >= w[1]) && r.sigma.iter().all(|s| *s >= 0.0));
        // E = U Sigma, so E^T E = Sigma^2.
        let e = embed(&r);
        let gram = e.transpose() * &e;
        let want = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, r.sigma.iter().map(|s| s * s)));
        prop_assert!((gram - want).abs().max() <= 1e-8 * r.sigma[0].powi(2).max(1.0));
    }

    #[test]
    fn scaling_the_input_scales_sigma(seed in any::<u64>(), alpha in 0.1f64..10.0) {
        let (x, _) = sparse(seed, 20, 15, 0.5);
        prop_assume!(x.nnz() > 0);
        let a = truncated_svd(&x, 3, 7, SvdParams::default()).unwrap();
        let b = truncated_svd(&x.map_values(|_, _, v| v * alpha), 3, 7, SvdParams::default()).unwrap();
        for (sa, sb) in a.sigma.iter().zip(&b.sigma) {
            prop_assert!((sa * alpha - sb).abs() <= 1e-9 * sb.max(1.0));
        }
    }

    #[test]
    fn same_seed_is_bit_identical(seed in any::<u64>()) {
        let (x, _) = sparse(seed, 25, 18, 0.3);
        prop_assume!(x.nnz() > 0);
        let a = truncated_svd(&x, 4, seed, SvdParams::default()).unwrap();
        let b = truncated_svd(&x, 4, seed, SvdParams::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn gapped_spectrum_recovered_to_jacobi_precision() {
    let sv = [50.0, 30.0, 20.0, 0.5, 0.4, 0.3, 0.2, 0.1];
    let dense = with_spectrum(3, 40, 30, &sv);
    let rows: Vec<Vec<f64>> = (0..40).map(|i| (0..30).map(|j| dense[(i, j)]).collect()).collect();
    let jac = oracle::jacobi_singular_values(&rows);
    for (a, b) in jac.iter().zip(&sv) {
        assert!((a - b).abs() < 1e-10, "oracle {a} vs {b}");
    }
    let r = truncated_svd(&CsrMatrix::from_dense(&dense), 3, 0, SvdParams::default()).unwrap();
    for (a, b) in r.sigma.iter().zip(&jac) {
        assert!((a - b).abs() <= 1e-9 * b, "{a} vs {b}");
    }
    let residual = (r.reconstruct() - &dense).norm();
    assert!((residual - oracle::optimal_residual(&jac, 3)).abs() < 1e-9);
}

#[test]
fn eckart_young_on_small_sparse_matrices() {
    for seed in 0..20 {
        let (x, table) = sparse(seed, 15, 12, 0.5);
        let jac = oracle::jacobi_singular_values(&table);
        for d in [1, 3, 6] {
            let r = truncated_svd(&x, d, seed, SvdParams::default()).unwrap();
            let residual = (r.reconstruct() - x.to_dense()).norm();
            let best = oracle::optimal_residual(&jac, d);
            assert!(residual >= best - 1e-9, "residual below the optimum");
            assert!(residual <= best * 1.01 + 1e-9, "seed {seed} d {d}: {residual} vs {best}");
        }
    }
}

#[test]
fn rank_deficient_input() {
    let dense = with_spectrum(9, 20, 20, &[4.0, 2.0]);
    let r = truncated_svd(&CsrMatrix::from_dense(&dense), 5, 1, SvdParams::default()).unwrap();
    assert!((r.sigma[0] - 4.0).abs() < 1e-10 && (r.sigma[1] - 2.0).abs() < 1e-10);
    assert!(r.sigma[2..].iter().all(|s| *s < 1e-10));
    assert!((r.reconstruct() - &dense).norm() < 1e-9);
}

#[test]
fn oversized_or_zero_dimension_is_rejected() {
    let (x, _) = sparse(1, 4, 3, 0.9);
    assert!(matches!(truncated_svd(&x, 4, 0, SvdParams::default()), Err(dwe::Error::Dimension(_))));
    assert!(truncated_svd(&x, 0, 0, SvdParams::default()).is_err());
    assert!(matches!(
        truncated_svd(&CsrMatrix::zeros(3, 3), 1, 0, SvdParams::default()),
        Err(dwe::Error::Empty(_))
    ));
}
