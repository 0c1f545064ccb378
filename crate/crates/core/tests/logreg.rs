mod support;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dwe::eval::{accuracy, objective_and_gradient, train_logreg, LogRegParams};
use support::oracle;

fn data(seed: u64, n: usize, d: usize, k: usize, margin: f64) -> (DMatrix<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| rng.gen_range(-margin..margin)).collect()).collect();
    let y: Vec<usize> = (0..n).map(|i| i % k).collect();
    let x = DMatrix::from_fn(n, d, |i, j| centers[y[i]][j] + rng.gen_range(-1.0..1.0));
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn objective_matches_direct_evaluation(seed in any::<u64>(), k in 2usize..5, d in 1usize..6, l2 in 0.0f64..2.0) {
        let (x, y) = data(seed, 20, d, k, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let w = DMatrix::from_fn(k, d, |_, _| rng.gen_range(-1.0..1.0));
        let b = DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
        let (f, _, _) = objective_and_gradient(&w, &b, &x, &y, l2);
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> { m.row_iter().map(|r| r.iter().copied().collect()).collect() };
        let want = oracle::logreg_objective(&rows(&w), b.as_slice(), &rows(&x), &y, l2);
        prop_assert!((f - want).abs() <= 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn trace_is_monotone_and_gradient_small(seed in any::<u64>(), k in 2usize..5) {
        let (x, y) = data(seed, 60, 4, k, 2.0);
        let m = train_logreg(&x, &y, LogRegParams::default(), 0).unwrap();
        prop_assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(m.converged, "grad norm {}", m.grad_norm);
        let (_, gw, gb) = objective_and_gradient(&m.weights, &m.bias, &x, &y, m.l2);
        prop_assert!((gw.norm_squared() + gb.norm_squared()).sqrt() <= 1e-6);
    }
}

#[test]
fn separable_clusters_are_learned() {
    let (x, y) = data(4, 200, 5, 4, 8.0);
    let m = train_logreg(&x, &y, LogRegParams::default(), 0).unwrap();
    assert!(accuracy(&m, &x, &y).unwrap() > 0.95);
    assert_eq!(m.predict(&x).len(), 200);
}

#[test]
fn single_class_is_rejected() {
    let x = DMatrix::from_element(3, 2, 1.0);
    assert!(train_logreg(&x, &[1, 1, 1], LogRegParams::default(), 0).is_err());
    assert!(train_logreg(&x, &[0, 1], LogRegParams::default(), 0).is_err());
}
