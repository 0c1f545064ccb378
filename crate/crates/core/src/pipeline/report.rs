//! Per-run metrics and the cross-run comparison table.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::eval::mean_std;

pub const METRICS_HEADER: &str = "method\tcontexts\tdimension\tseed\taccuracy\tpair_count\twall_time";

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub method: String,
    /// Context configuration label, e.g. `3-hop+K` or `window-10`.
    pub contexts: String,
    pub dimension: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub pair_count: u64,
    pub wall_time: f64,
}

impl RunMetrics {
    pub fn tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.3}",
            self.method, self.contexts, self.dimension, self.seed, self.accuracy, self.pair_count, self.wall_time
        )
    }

    /// `key = value` lines.
    pub fn key_values(&self) -> String {
        format!(
            "method = {}\ncontexts = {}\ndimension = {}\nseed = {}\naccuracy = {}\npair_count = {}\nwall_time = {:.3}\n",
            self.method, self.contexts, self.dimension, self.seed, self.accuracy, self.pair_count, self.wall_time
        )
    }
}

pub fn write_metrics<W: Write>(mut out: W, rows: &[RunMetrics]) -> Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.tsv_line())?;
    }
    Ok(())
}

pub fn read_metrics<R: BufRead>(input: R) -> Result<Vec<RunMetrics>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| Error::Record {
            line: i + 1,
            message: m.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(bad("expected 7 tab-separated fields"));
        }
        rows.push(RunMetrics {
            method: f[0].to_string(),
            contexts: f[1].to_string(),
            dimension: f[2].parse().map_err(|_| bad("bad dimension"))?,
            seed: f[3].parse().map_err(|_| bad("bad seed"))?,
            accuracy: f[4].parse().map_err(|_| bad("bad accuracy"))?,
            pair_count: f[5].parse().map_err(|_| bad("bad pair_count"))?,
            wall_time: f[6].parse().map_err(|_| bad("bad wall_time"))?,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub contexts: String,
    pub dimension: usize,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
    /// Pair count of the first run; runs in a group share their contexts.
    pub pair_count: u64,
}

/// Runs of one method and dimension that differ only in contexts, ordered
/// by ascending pair count.
#[derive(Clone, Debug, PartialEq)]
pub struct Ablation {
    pub method: String,
    pub dimension: usize,
    pub rows: Vec<MethodSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub summaries: Vec<MethodSummary>,
    pub ablations: Vec<Ablation>,
}

impl Comparison {
    pub fn find(&self, method: &str, contexts: Option<&str>, dimension: usize) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| {
            s.method == method && s.dimension == dimension && contexts.map_or(true, |c| s.contexts == c)
        })
    }
}

fn method_rank(m: &str) -> usize {
    match m {
        "ppmi_lc" => 0,
        "dwe" => 1,
        "cedwe" => 2,
        _ => 3,
    }
}

pub fn compare_report(runs: &[RunMetrics]) -> Comparison {
    let mut groups: BTreeMap<(usize, String, usize, String), Vec<&RunMetrics>> = BTreeMap::new();
    for r in runs {
        groups
            .entry((method_rank(&r.method), r.method.clone(), r.dimension, r.contexts.clone()))
            .or_default()
            .push(r);
    }
    let summaries: Vec<MethodSummary> = groups
        .into_iter()
        .map(|((_, method, dimension, contexts), rs)| {
            let acc: Vec<f64> = rs.iter().map(|r| r.accuracy).collect();
            let (mean, std) = mean_std(&acc);
            MethodSummary {
                method,
                contexts,
                dimension,
                runs: rs.len(),
                mean,
                std,
                pair_count: rs[0].pair_count,
            }
        })
        .collect();

    let mut by_method: BTreeMap<(usize, String, usize), Vec<MethodSummary>> = BTreeMap::new();
    for s in &summaries {
        by_method
            .entry((method_rank(&s.method), s.method.clone(), s.dimension))
            .or_default()
            .push(s.clone());
    }
    let ablations = by_method
        .into_iter()
        .filter(|(_, rows)| rows.len() > 1)
        .map(|((_, method, dimension), mut rows)| {
            rows.sort_by(|a, b| a.pair_count.cmp(&b.pair_count).then(a.contexts.cmp(&b.contexts)));
            Ablation { method, dimension, rows }
        })
        .collect();
    Comparison { summaries, ablations }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:<12} {:>5} {:>4} {:>16} {:>12}",
            "method", "contexts", "dim", "runs", "accuracy (%)", "pairs"
        )?;
        for s in &self.summaries {
            writeln!(
                f,
                "{:<8} {:<12} {:>5} {:>4} {:>8.2} ± {:<5.2} {:>12}",
                s.method,
                s.contexts,
                s.dimension,
                s.runs,
                100.0 * s.mean,
                100.0 * s.std,
                s.pair_count
            )?;
        }
        for a in &self.ablations {
            writeln!(f)?;
            writeln!(f, "pair-count ablation: {} d={}", a.method, a.dimension)?;
            for s in &a.rows {
                writeln!(
                    f,
                    "  {:<12} {:>12} pairs {:>8.2} ± {:.2}",
                    s.contexts,
                    s.pair_count,
                    100.0 * s.mean,
                    100.0 * s.std
                )?;
            }
        }
        Ok(())
    }
}
