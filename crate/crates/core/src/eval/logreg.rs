//! Multinomial logistic regression trained by full-batch L-BFGS.
//!
//! Objective: `sum_i CE(softmax(W x_i + b), y_i) + (l2 / 2) ||W||^2`, with the
//! bias unpenalized. Parameters start at zero, so training is deterministic.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogRegParams {
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2: 1.0,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogRegModel {
    /// `n_classes x d`
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub l2: f64,
    pub iterations: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial value.
    pub trace: Vec<f64>,
    pub seed: u64,
}

impl LogRegModel {
    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn scores(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = x * self.weights.transpose();
        for mut row in z.row_iter_mut() {
            row += self.bias.transpose();
        }
        z
    }

    /// Header `classes dim l2 iterations objective converged seed`, then one
    /// line per class: bias followed by its weights.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{} {} {} {} {} {} {}",
            self.n_classes(),
            self.weights.ncols(),
            self.l2,
            self.iterations,
            self.objective,
            self.converged,
            self.seed
        )?;
        for j in 0..self.n_classes() {
            let mut line = self.bias[j].to_string();
            for v in self.weights.row(j).iter() {
                line.push(' ');
                line.push_str(&v.to_string());
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let bad = |line: usize, m: &str| Error::Record {
            line,
            message: m.to_string(),
        };
        let header = lines.next().ok_or_else(|| Error::Empty("model file".into()))??;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 7 {
            return Err(bad(1, "expected 7 header fields"));
        }
        let k: usize = h[0].parse().map_err(|_| bad(1, "bad class count"))?;
        let d: usize = h[1].parse().map_err(|_| bad(1, "bad dimension"))?;
        let mut weights = DMatrix::zeros(k, d);
        let mut bias = DVector::zeros(k);
        for j in 0..k {
            let line = lines.next().ok_or_else(|| bad(j + 2, "missing class row"))??;
            let vals = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad(j + 2, "bad number"))?;
            if vals.len() != d + 1 {
                return Err(bad(j + 2, "wrong number of values"));
            }
            bias[j] = vals[0];
            for (c, v) in vals[1..].iter().enumerate() {
                weights[(j, c)] = *v;
            }
        }
        Ok(LogRegModel {
            weights,
            bias,
            l2: h[2].parse().map_err(|_| bad(1, "bad l2"))?,
            iterations: h[3].parse().map_err(|_| bad(1, "bad iterations"))?,
            objective: h[4].parse().map_err(|_| bad(1, "bad objective"))?,
            grad_norm: f64::NAN,
            converged: h[5].parse().map_err(|_| bad(1, "bad converged flag"))?,
            trace: Vec::new(),
            seed: h[6].parse().map_err(|_| bad(1, "bad seed"))?,
        })
    }

    /// Argmax class per row, lowest id on ties.
    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<usize> {
        let z = self.scores(x);
        z.row_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .fold(0, |best, (j, &v)| if v > r[best] { j } else { best })
            })
            .collect()
    }
}

fn unpack(theta: &DVector<f64>, k: usize, d: usize) -> (DMatrix<f64>, DVector<f64>) {
    let w = DMatrix::from_row_slice(k, d, &theta.as_slice()[..k * d]);
    let b = DVector::from_row_slice(&theta.as_slice()[k * d..]);
    (w, b)
}

fn pack(w: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut v = Vec::with_capacity(w.len() + b.len());
    for r in w.row_iter() {
        v.extend(r.iter());
    }
    v.extend(b.iter());
    DVector::from_vec(v)
}

/// Objective and gradient at `(weights, bias)`; the gradient is returned in
/// the same shapes.
pub fn objective_and_gradient(
    weights: &DMatrix<f64>,
    bias: &DVector<f64>,
    x: &DMatrix<f64>,
    labels: &[usize],
    l2: f64,
) -> (f64, DMatrix<f64>, DVector<f64>) {
    let k = weights.nrows();
    let mut z = x * weights.transpose();
    let mut loss = 0.0;
    for (i, mut row) in z.row_iter_mut().enumerate() {
        row += bias.transpose();
        let max = row.max();
        let y = labels[i];
        let shifted_y = row[y] - max;
        let mut denom = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            denom += *v;
        }
        loss += denom.ln() - shifted_y;
        row /= denom;
        row[y] -= 1.0;
    }
    // z now holds P - Y.
    let mut gw = z.transpose() * x;
    gw += weights * l2;
    let gb = DVector::from_iterator(k, (0..k).map(|j| z.column(j).sum()));
    loss += 0.5 * l2 * weights.norm_squared();
    (loss, gw, gb)
}

/// Fits a model with `n_classes = max(label) + 1`; at least two distinct
/// labels must be present.
pub fn train_logreg(
    x: &DMatrix<f64>,
    labels: &[usize],
    params: LogRegParams,
    seed: u64,
) -> Result<LogRegModel> {
    if x.nrows() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let distinct = {
        let mut seen = vec![false; k];
        labels.iter().for_each(|&y| seen[y] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        return Err(Error::config("logistic regression needs at least two classes"));
    }
    let d = x.ncols();
    let eval = |theta: &DVector<f64>| {
        let (w, b) = unpack(theta, k, d);
        let (f, gw, gb) = objective_and_gradient(&w, &b, x, labels, params.l2);
        (f, pack(&gw, &gb))
    };

    let mut theta = DVector::zeros(k * d + k);
    let (mut f, mut g) = eval(&theta);
    let mut trace = vec![f];
    let mut history: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    let memory = 10;
    let mut iterations = 0;
    let mut converged = g.norm() <= params.tol;

    while !converged && iterations < params.max_iter {
        iterations += 1;
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * s.dot(&q);
            q.axpy(-a, y, 1.0);
            alphas.push(a);
        }
        let gamma = history
            .back()
            .map_or(1.0 / g.norm().max(1.0), |(s, y, _)| s.dot(y) / y.dot(y));
        q *= gamma;
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * y.dot(&q);
            q.axpy(a - b, s, 1.0);
        }
        let mut dir = -q;
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            history.clear();
            dir = -g.clone();
            slope = -g.norm_squared();
        }

        // Backtracking Armijo search.
        let mut step = 1.0;
        let accepted = loop {
            let cand = &theta + &dir * step;
            let (fc, gc) = eval(&cand);
            if fc.is_finite() && fc <= f + 1e-4 * step * slope {
                break Some((cand, fc, gc));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((cand, fc, gc)) = accepted else { break };
        let s = &cand - &theta;
        let y = &gc - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            history.push_back((s, y, 1.0 / sy));
            if history.len() > memory {
                history.pop_front();
            }
        }
        let improvement = f - fc;
        theta = cand;
        f = fc;
        g = gc;
        trace.push(f);
        converged = g.norm() <= params.tol;
        if improvement <= f64::EPSILON * f.abs() && !converged {
            // A stale curvature history can stall short of tol; retry once
            // from steepest descent before giving up.
            if history.is_empty() {
                break;
            }
            history.clear();
        }
    }

    let (weights, bias) = unpack(&theta, k, d);
    Ok(LogRegModel {
        weights,
        bias,
        l2: params.l2,
        iterations,
        objective: f,
        grad_norm: g.norm(),
        converged,
        trace,
        seed,
    })
}

/// Fraction of rows whose predicted class equals the label.
pub fn accuracy(model: &LogRegModel, x: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Empty("accuracy of an empty test set".into()));
    }
    let pred = model.predict(x);
    let hits = pred.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (DMatrix<f64>, Vec<usize>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let c = i % 2;
            let off = (i / 2) as f64 * 0.1;
            let (x, y) = if c == 0 { (-1.0 - off, 0.3 * off) } else { (1.0 + off, -0.3 * off) };
            rows.extend([x, y]);
            labels.push(c);
        }
        (DMatrix::from_row_slice(20, 2, &rows), labels)
    }

    #[test]
    fn separable_blobs() {
        let (x, y) = blobs();
        let m = train_logreg(&x, &y, LogRegParams::default(), 0).unwrap();
        assert_eq!(accuracy(&m, &x, &y).unwrap(), 1.0);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(m.converged, "grad norm {}", m.grad_norm);
    }

    #[test]
    fn zero_features_predict_majority() {
        let x = DMatrix::zeros(10, 3);
        let y = vec![0, 1, 1, 2, 1, 1, 0, 1, 2, 1];
        let m = train_logreg(&x, &y, LogRegParams::default(), 0).unwrap();
        assert!((accuracy(&m, &x, &y).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let (x, y) = blobs();
        let m = train_logreg(&x, &y, LogRegParams::default(), 7).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = LogRegModel::read_text(&buf[..]).unwrap();
        assert_eq!(back.weights, m.weights);
        assert_eq!(back.bias, m.bias);
        assert_eq!(back.seed, 7);
        assert_eq!(back.predict(&x), m.predict(&x));
    }

    #[test]
    fn single_class_is_rejected() {
        let x = DMatrix::zeros(3, 2);
        assert!(matches!(
            train_logreg(&x, &[1, 1, 1], LogRegParams::default(), 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn accuracy_cases() {
        let model = LogRegModel {
            weights: DMatrix::from_row_slice(2, 1, &[-1.0, 1.0]),
            bias: DVector::zeros(2),
            l2: 0.0,
            iterations: 0,
            objective: 0.0,
            grad_norm: 0.0,
            converged: true,
            trace: vec![],
            seed: 0,
        };
        let x = DMatrix::from_row_slice(4, 1, &[-1.0, 1.0, 2.0, -3.0]);
        assert_eq!(accuracy(&model, &x, &[0, 1, 1, 0]).unwrap(), 1.0);
        assert_eq!(accuracy(&model, &x, &[1, 0, 0, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&model, &x, &[0, 1, 1, 1]).unwrap(), 0.75);
        assert!(accuracy(&model, &DMatrix::zeros(0, 1), &[]).is_err());
        // Zero scores tie; the lowest class wins.
        assert_eq!(model.predict(&DMatrix::zeros(1, 1)), vec![0]);
    }
}
