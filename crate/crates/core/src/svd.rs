//! Randomized truncated SVD of sparse matrices.
//!
//! Range finder with a seeded Gaussian sketch, re-orthonormalized subspace
//! iterations, then an exact SVD of the small projected matrix.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvdParams {
    pub oversampling: usize,
    pub power_iters: usize,
}

impl Default for SvdParams {
    fn default() -> Self {
        SvdParams {
            oversampling: 10,
            power_iters: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvdResult {
    /// `nrows x d`, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Nonincreasing.
    pub sigma: Vec<f64>,
    /// `ncols x d`, orthonormal columns.
    pub v: DMatrix<f64>,
    pub seed: u64,
    pub d: usize,
}

impl SvdResult {
    /// `U diag(sigma) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    // Filled column by column so the sketch does not depend on layout.
    let mut g = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            g[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    g
}

/// Rank-`d` randomized SVD. Deterministic for fixed inputs and seed.
pub fn truncated_svd(x: &CsrMatrix, d: usize, seed: u64, params: SvdParams) -> Result<SvdResult> {
    let (m, n) = (x.nrows(), x.ncols());
    if d == 0 {
        return Err(Error::config("target dimension must be positive"));
    }
    if d > m.min(n) {
        return Err(Error::Dimension(format!(
            "dimension {d} exceeds the smaller side of a {m} x {n} matrix"
        )));
    }
    if x.nnz() == 0 {
        return Err(Error::Empty("cannot factorize an all-zero matrix".into()));
    }
    let l = (d + params.oversampling).min(m).min(n);

    let omega = gaussian(n, l, seed);
    let mut q = orthonormal_basis(x.mul_dense(&omega));
    for _ in 0..params.power_iters {
        let z = orthonormal_basis(x.tr_mul_dense(&q));
        q = orthonormal_basis(x.mul_dense(&z));
    }

    // Bᵀ = Aᵀ Q is n x l; its SVD is Bᵀ = W S Zᵀ, so B = Z S Wᵀ.
    let bt = x.tr_mul_dense(&q);
    let svd = bt.svd(true, true);
    let w = svd.u.expect("requested left vectors");
    let zt = svd.v_t.expect("requested right vectors");
    let s = svd.singular_values;

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    order.truncate(d);

    let z = zt.transpose();
    let mut u_small = DMatrix::zeros(l, d);
    let mut v = DMatrix::zeros(n, d);
    let mut sigma = Vec::with_capacity(d);
    for (k, &j) in order.iter().enumerate() {
        u_small.set_column(k, &z.column(j));
        v.set_column(k, &w.column(j));
        sigma.push(s[j].max(0.0));
    }
    Ok(SvdResult {
        u: q * u_small,
        sigma,
        v,
        seed,
        d,
    })
}
