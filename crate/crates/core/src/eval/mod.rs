//! Downstream evaluation: averaged-embedding document features, multinomial
//! logistic regression, chi-square word selection and neighbor queries.

mod chi2;
mod features;
mod logreg;

pub use chi2::{chi_square_select, chi_square_statistic, ClassSpecificWord};
pub use features::{doc_embedding, nearest_neighbors, nearest_to_row, write_features, DocFeature, FeatureSet};
pub use logreg::{accuracy, objective_and_gradient, train_logreg, LogRegModel, LogRegParams};

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
