//! Sparse word-context co-occurrence counts with marginals, and word-class
//! occurrence counts.

use std::collections::HashMap;
use std::path::Path;

use crate::context::WeightedPair;
use crate::corpus::{LabeledDocument, Vocabulary};
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, MatrixKind};

/// Weighted counts `N(w, c)` with row sums `N(w)`, column sums `N(c)` and
/// grand total `|N|`, all derived from the stored entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CooccurrenceMatrix {
    counts: CsrMatrix,
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
    total: f64,
}

impl CooccurrenceMatrix {
    pub fn from_csr(counts: CsrMatrix) -> Result<Self> {
        if counts.values().iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::config("co-occurrence weights must be positive and finite"));
        }
        let row_sums = counts.row_sums();
        let col_sums = counts.col_sums();
        let total = row_sums.iter().sum();
        Ok(CooccurrenceMatrix {
            counts,
            row_sums,
            col_sums,
            total,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_csr(CsrMatrix::zeros(n, n)).expect("empty matrix is valid")
    }

    pub fn counts(&self) -> &CsrMatrix {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.counts.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.counts.nnz()
    }

    pub fn get(&self, target: usize, context: usize) -> f64 {
        self.counts.get(target, context)
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// True when the stored marginals equal a fresh recomputation bit for bit.
    pub fn marginals_consistent(&self) -> bool {
        let rs = self.counts.row_sums();
        let cs = self.counts.col_sums();
        let total: f64 = rs.iter().sum();
        rs == self.row_sums && cs == self.col_sums && total.to_bits() == self.total.to_bits()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.counts.save(path, MatrixKind::Cooccurrence)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (m, kind) = CsrMatrix::load(path)?;
        if kind != MatrixKind::Cooccurrence {
            return Err(Error::format(path, "not a co-occurrence matrix"));
        }
        Self::from_csr(m)
    }
}

/// Per-shard accumulator; finalized into a [`CooccurrenceMatrix`].
#[derive(Clone, Debug, Default)]
pub struct CooccurrenceBuilder {
    dim: usize,
    cells: HashMap<(u32, u32), f64>,
    samples: u64,
}

impl CooccurrenceBuilder {
    pub fn new(dim: usize) -> Self {
        CooccurrenceBuilder {
            dim,
            cells: HashMap::new(),
            samples: 0,
        }
    }

    pub fn add(&mut self, p: WeightedPair) -> Result<()> {
        for id in [p.target, p.context] {
            if id >= self.dim {
                return Err(Error::OutOfRange { id, size: self.dim });
            }
        }
        if !(p.weight > 0.0 && p.weight.is_finite()) {
            return Err(Error::config(format!("pair weight {} is not positive", p.weight)));
        }
        *self
            .cells
            .entry((p.target as u32, p.context as u32))
            .or_default() += p.weight;
        Ok(())
    }

    pub fn extend(&mut self, pairs: impl IntoIterator<Item = WeightedPair>) -> Result<()> {
        pairs.into_iter().try_for_each(|p| self.add(p))
    }

    /// Raw context samples behind the accumulated pairs (bookkeeping only).
    pub fn add_samples(&mut self, n: u64) {
        self.samples += n;
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn merge(mut self, other: CooccurrenceBuilder) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        for (k, v) in other.cells {
            *self.cells.entry(k).or_default() += v;
        }
        self.samples += other.samples;
        Ok(self)
    }

    pub fn finish(self) -> CooccurrenceMatrix {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.dim];
        for ((r, c), v) in self.cells {
            rows[r as usize].push((c as usize, v));
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|&(c, _)| c);
        }
        CooccurrenceMatrix::from_csr(CsrMatrix::from_sorted_rows(self.dim, rows))
            .expect("builder only stores positive weights")
    }
}

/// Sums a stream of pairs over a `dim x dim` vocabulary.
pub fn accumulate(
    pairs: impl IntoIterator<Item = WeightedPair>,
    dim: usize,
) -> Result<CooccurrenceMatrix> {
    let mut b = CooccurrenceBuilder::new(dim);
    b.extend(pairs)?;
    Ok(b.finish())
}

/// Entrywise sum of two matrices of equal shape.
pub fn merge(a: &CooccurrenceMatrix, b: &CooccurrenceMatrix) -> Result<CooccurrenceMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!("{} vs {}", a.dim(), b.dim())));
    }
    let rows = (0..a.dim())
        .map(|r| {
            let mut row: Vec<(usize, f64)> = a.counts.row(r).collect();
            for (c, v) in b.counts.row(r) {
                match row.binary_search_by_key(&c, |&(c, _)| c) {
                    Ok(k) => row[k].1 += v,
                    Err(k) => row.insert(k, (c, v)),
                }
            }
            row
        })
        .collect();
    CooccurrenceMatrix::from_csr(CsrMatrix::from_sorted_rows(a.dim(), rows))
}

/// Occurrences of each vocabulary word in documents of each class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordClassMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl WordClassMatrix {
    pub fn zeros(n_words: usize, n_classes: usize) -> Self {
        WordClassMatrix {
            n_classes,
            counts: vec![0; n_words * n_classes],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let n_classes = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_classes) {
            return Err(Error::Dimension("ragged word-class rows".into()));
        }
        Ok(WordClassMatrix {
            n_classes,
            counts: rows.concat(),
        })
    }

    pub fn n_words(&self) -> usize {
        if self.n_classes == 0 {
            0
        } else {
            self.counts.len() / self.n_classes
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, word: usize) -> &[u64] {
        &self.counts[word * self.n_classes..(word + 1) * self.n_classes]
    }

    pub fn get(&self, word: usize, class: usize) -> u64 {
        self.counts[word * self.n_classes + class]
    }

    pub fn increment(&mut self, word: usize, class: usize) {
        self.counts[word * self.n_classes + class] += 1;
    }

    /// Column totals: in-vocabulary tokens per class.
    pub fn class_totals(&self) -> Vec<u64> {
        let mut t = vec![0; self.n_classes];
        for w in 0..self.n_words() {
            for (j, &c) in self.row(w).iter().enumerate() {
                t[j] += c;
            }
        }
        t
    }

    /// `word<TAB>c0<TAB>c1...` lines.
    pub fn write_tsv<W: std::io::Write>(&self, mut out: W, vocab: &Vocabulary) -> Result<()> {
        for w in 0..self.n_words() {
            let cells: Vec<String> = self.row(w).iter().map(u64::to_string).collect();
            writeln!(out, "{}\t{}", vocab.word(w), cells.join("\t"))?;
        }
        Ok(())
    }

    pub fn read_tsv<R: std::io::BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<u64>, _> =
                line.split('\t').skip(1).map(str::parse).collect();
            rows.push(row.map_err(|_| Error::Record {
                line: i + 1,
                message: "non-integer class count".into(),
            })?);
        }
        Self::from_rows(&rows)
    }
}

pub fn class_counts<'a>(
    docs: impl IntoIterator<Item = &'a LabeledDocument>,
    vocab: &Vocabulary,
    n_classes: usize,
) -> Result<WordClassMatrix> {
    let mut m = WordClassMatrix::zeros(vocab.len(), n_classes);
    for doc in docs {
        if doc.class_id >= n_classes {
            return Err(Error::OutOfRange {
                id: doc.class_id,
                size: n_classes,
            });
        }
        for tok in doc.tokens() {
            if let Some(id) = vocab.id(&tok.surface) {
                m.increment(id, doc.class_id);
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, ParsedSentence, Stopwords, Token, TokenCounts};
    use proptest::prelude::*;

    fn wp(t: usize, c: usize, w: f64) -> WeightedPair {
        WeightedPair::new(t, c, w)
    }

    #[test]
    fn accumulates_stream() {
        let m = accumulate([wp(0, 1, 2.0), wp(0, 2, 1.5), wp(0, 1, 1.0)], 3).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(0, 2), 1.5);
        assert_eq!(m.row_sums()[0], 4.5);
        assert_eq!(m.total(), 4.5);
        assert_eq!(m.nnz(), 2);
        assert!(m.marginals_consistent());
    }

    #[test]
    fn empty_stream() {
        let m = accumulate([], 4).unwrap();
        assert_eq!(m.total(), 0.0);
        assert_eq!(m.nnz(), 0);
        assert_eq!(m, CooccurrenceMatrix::zeros(4));
    }

    #[test]
    fn out_of_range_is_fatal() {
        assert!(matches!(
            accumulate([wp(0, 3, 1.0)], 3),
            Err(Error::OutOfRange { id: 3, size: 3 })
        ));
    }

    #[test]
    fn merge_identity_and_shape() {
        let x = accumulate([wp(0, 1, 2.0), wp(1, 0, 0.5)], 2).unwrap();
        assert_eq!(merge(&x, &CooccurrenceMatrix::zeros(2)).unwrap(), x);
        assert!(merge(&x, &CooccurrenceMatrix::zeros(3)).is_err());
    }

    #[test]
    fn counts_per_class() {
        let counts: TokenCounts = [("dog", 5), ("cat", 5)].into_iter().collect();
        let v = build_vocab(&counts, 10, 1, &Stopwords::english()).unwrap();
        let s = ParsedSentence::new(
            "d",
            vec![
                Token::new(1, "dog", "NOUN", 0, "root"),
                Token::new(2, "dog", "NOUN", 1, "conj"),
                Token::new(3, "cat", "NOUN", 1, "conj"),
                Token::new(4, "the", "DET", 1, "det"),
                Token::new(5, "emu", "NOUN", 1, "conj"),
            ],
        );
        let doc = LabeledDocument {
            doc_id: "d".into(),
            class_id: 0,
            sentences: vec![s],
        };
        let m = class_counts([&doc], &v, 2).unwrap();
        assert_eq!(m.row(v.id("dog").unwrap()), &[2, 0]);
        assert_eq!(m.row(v.id("cat").unwrap()), &[1, 0]);
        assert_eq!(m.class_totals(), vec![3, 0]);

        let empty = class_counts(std::iter::empty(), &v, 2).unwrap();
        assert_eq!(empty, WordClassMatrix::zeros(2, 2));
    }

    proptest! {
        #[test]
        fn shards_merge_to_single_pass(
            stream in prop::collection::vec((0usize..8, 0usize..8, 0.1f64..4.0), 0..120),
            cuts in prop::collection::vec(0usize..120, 0..5),
        ) {
            let pairs: Vec<WeightedPair> = stream.iter().map(|&(t, c, w)| wp(t, c, w)).collect();
            let oracle = accumulate(pairs.iter().copied(), 8).unwrap();

            let mut bounds: Vec<usize> = cuts.into_iter().map(|c| c.min(pairs.len())).collect();
            bounds.push(0);
            bounds.push(pairs.len());
            bounds.sort();
            let mut merged = CooccurrenceMatrix::zeros(8);
            // Merge shards in reverse to also exercise order independence.
            for w in bounds.windows(2).rev() {
                let shard = accumulate(pairs[w[0]..w[1]].iter().copied(), 8).unwrap();
                merged = merge(&shard, &merged).unwrap();
            }
            prop_assert!(merged.marginals_consistent());
            prop_assert_eq!(merged.nnz(), oracle.nnz());
            prop_assert!(merged.nnz() <= stream.len());
            for (r, c, v) in oracle.counts().triplets() {
                prop_assert!((merged.get(r, c) - v).abs() <= 1e-12 * v.max(1.0));
            }
            prop_assert!((merged.total() - oracle.total()).abs() <= 1e-10);
        }

        #[test]
        fn merge_commutes(
            a in prop::collection::vec((0usize..5, 0usize..5, 0.1f64..4.0), 0..30),
            b in prop::collection::vec((0usize..5, 0usize..5, 0.1f64..4.0), 0..30),
        ) {
            let a = accumulate(a.into_iter().map(|(t, c, w)| wp(t, c, w)), 5).unwrap();
            let b = accumulate(b.into_iter().map(|(t, c, w)| wp(t, c, w)), 5).unwrap();
            prop_assert_eq!(merge(&a, &b).unwrap(), merge(&b, &a).unwrap());
        }
    }
}
