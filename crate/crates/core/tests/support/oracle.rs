//! Brute-force references. None of these call into the code paths they check.

use std::collections::BTreeMap;

/// One-sided Jacobi SVD of a dense row-major `m x n` matrix (`m >= n` is not
/// required; the routine transposes internally). Returns singular values in
/// nonincreasing order.
pub fn jacobi_singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    // Work on columns of the taller orientation.
    let (rows, cols, get): (usize, usize, Box<dyn Fn(usize, usize) -> f64>) = if m >= n {
        (m, n, Box::new(|i, j| a[i][j]))
    } else {
        (n, m, Box::new(|i, j| a[j][i]))
    };
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| get(i, j)).collect()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = u[p].iter().map(|x| x * x).sum();
                let beta: f64 = u[q].iter().map(|x| x * x).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (x, y) = (u[p][i], u[q][i]);
                    u[p][i] = c * x - s * y;
                    u[q][i] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = u.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Optimal rank-`d` Frobenius residual from the full spectrum.
pub fn optimal_residual(singular_values: &[f64], d: usize) -> f64 {
    singular_values[d.min(singular_values.len())..]
        .iter()
        .map(|s| s * s)
        .sum::<f64>()
        .sqrt()
}

/// PPMI straight from the definitions: joint and marginal probabilities from
/// a dense weighted count table, `max(log(P(w,c) / (P(w) P(c))), 0)` on
/// observed cells. Returns `(row, col) -> value` for positive cells.
pub fn brute_force_ppmi(counts: &[Vec<f64>]) -> BTreeMap<(usize, usize), f64> {
    let total: f64 = counts.iter().flatten().sum();
    let n_rows = counts.len();
    let n_cols = counts.first().map_or(0, Vec::len);
    let mut out = BTreeMap::new();
    for w in 0..n_rows {
        for c in 0..n_cols {
            if counts[w][c] <= 0.0 {
                continue;
            }
            let p_wc = counts[w][c] / total;
            let p_w: f64 = (0..n_cols).map(|k| counts[w][k] / total).sum();
            let p_c: f64 = (0..n_rows).map(|k| counts[k][c] / total).sum();
            let v = (p_wc / (p_w * p_c)).ln();
            if v > 0.0 {
                out.insert((w, c), v);
            }
        }
    }
    out
}

/// Multinomial logistic objective evaluated directly, for finite differences.
pub fn logreg_objective(
    w: &[Vec<f64>],
    b: &[f64],
    x: &[Vec<f64>],
    y: &[usize],
    l2: f64,
) -> f64 {
    let mut f = 0.0;
    for (xi, &yi) in x.iter().zip(y) {
        let z: Vec<f64> = w
            .iter()
            .zip(b)
            .map(|(wk, bk)| wk.iter().zip(xi).map(|(a, c)| a * c).sum::<f64>() + bk)
            .collect();
        let lse = z.iter().map(|v| v.exp()).sum::<f64>().ln();
        f += lse - z[yi];
    }
    f + 0.5 * l2 * w.iter().flatten().map(|v| v * v).sum::<f64>()
}

/// All-pairs tree distances by Floyd-Warshall over the undirected tree of a
/// head array (`heads[i]` is the 1-based head of token `i + 1`, 0 for root).
pub fn tree_distances(heads: &[usize]) -> Vec<Vec<usize>> {
    let n = heads.len();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        if heads[i] > 0 {
            let h = heads[i] - 1;
            d[i][h] = 1;
            d[h][i] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Expected `(target word, context word) -> weight` for one sentence with
/// every token in the vocabulary: neighbors within `n_hops` weigh `1 / d`,
/// keywords add `keyword_weight`, self pairs excluded.
pub fn context_weights(
    words: &[String],
    heads: &[usize],
    keyword: &[bool],
    n_hops: usize,
    use_keywords: bool,
    keyword_weight: f64,
) -> BTreeMap<(String, String), f64> {
    let dist = tree_distances(heads);
    let mut out: BTreeMap<(String, String), f64> = BTreeMap::new();
    for t in 0..words.len() {
        for c in 0..words.len() {
            if t == c {
                continue;
            }
            let mut w = 0.0;
            if dist[t][c] <= n_hops {
                w += 1.0 / dist[t][c] as f64;
            }
            if use_keywords && keyword[c] {
                w += keyword_weight;
            }
            if w > 0.0 {
                *out.entry((words[t].clone(), words[c].clone())).or_default() += w;
            }
        }
    }
    out
}
