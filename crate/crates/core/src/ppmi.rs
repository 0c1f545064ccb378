//! PMI / PPMI from weighted co-occurrence counts, and the class-enhanced
//! row extension `X'_i = [p_i1 X_i, ..., p_in X_i]`.

use std::path::Path;

use crate::cooccur::{CooccurrenceMatrix, WordClassMatrix};
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, MatrixKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Plain,
    ClassExtended { n_classes: usize },
}

/// Nonnegative sparse matrix; zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PpmiMatrix {
    matrix: CsrMatrix,
    provenance: Provenance,
}

impl PpmiMatrix {
    pub fn new(matrix: CsrMatrix, provenance: Provenance) -> Result<Self> {
        if matrix.values().iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::config("PPMI values must be positive and finite"));
        }
        if let Provenance::ClassExtended { n_classes } = provenance {
            if n_classes == 0 || matrix.ncols() % n_classes != 0 {
                return Err(Error::Dimension(format!(
                    "{} columns do not split into {n_classes} class blocks",
                    matrix.ncols()
                )));
            }
        }
        Ok(PpmiMatrix { matrix, provenance })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CsrMatrix {
        self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let kind = match self.provenance {
            Provenance::Plain => MatrixKind::Ppmi,
            Provenance::ClassExtended { .. } => MatrixKind::ClassExtended,
        };
        self.matrix.save(path, kind)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (m, kind) = CsrMatrix::load(path)?;
        let provenance = match kind {
            MatrixKind::Ppmi => Provenance::Plain,
            MatrixKind::ClassExtended if m.nrows() > 0 => Provenance::ClassExtended {
                n_classes: m.ncols() / m.nrows(),
            },
            _ => return Err(Error::format(path, "not a PPMI matrix")),
        };
        Self::new(m, provenance)
    }
}

/// `log(N(w,c) |N| / (N(w) N(c)))` on observed entries only.
pub fn pmi(x: &CooccurrenceMatrix) -> Result<CsrMatrix> {
    if !(x.total() > 0.0) {
        return Err(Error::Empty("co-occurrence matrix has zero total".into()));
    }
    let total = x.total();
    let rs = x.row_sums();
    let cs = x.col_sums();
    Ok(x.counts().map_values(|w, c, n| {
        debug_assert!(rs[w] > 0.0 && cs[c] > 0.0);
        (n * total / (rs[w] * cs[c])).ln()
    }))
}

/// `max(PMI, 0)` with nonpositive entries removed from storage.
pub fn ppmi(x: &CooccurrenceMatrix) -> Result<PpmiMatrix> {
    let m = pmi(x)?.retain(|v| v > 0.0);
    PpmiMatrix::new(m, Provenance::Plain)
}

/// Row-normalized class distribution `p_ij` per word; all-zero rows for words
/// without class counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassProbabilityTable {
    n_classes: usize,
    probs: Vec<f64>,
}

impl ClassProbabilityTable {
    pub fn n_words(&self) -> usize {
        if self.n_classes == 0 {
            0
        } else {
            self.probs.len() / self.n_classes
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, word: usize) -> &[f64] {
        &self.probs[word * self.n_classes..(word + 1) * self.n_classes]
    }

    /// Explicit table; mostly for tests and external callers.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_classes = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_classes) {
            return Err(Error::Dimension("ragged probability rows".into()));
        }
        Ok(ClassProbabilityTable {
            n_classes,
            probs: rows.concat(),
        })
    }
}

pub fn class_probabilities(w: &WordClassMatrix) -> ClassProbabilityTable {
    let n = w.n_classes();
    let mut probs = Vec::with_capacity(w.n_words() * n);
    for i in 0..w.n_words() {
        let row = w.row(i);
        let total: u64 = row.iter().sum();
        if total == 0 {
            probs.extend(std::iter::repeat(0.0).take(n));
        } else {
            probs.extend(row.iter().map(|&c| c as f64 / total as f64));
        }
    }
    ClassProbabilityTable { n_classes: n, probs }
}

/// Concatenates `p_ij * X_i` for every class `j`; column `c` of block `j`
/// lands at `j * ncols + c`. Zero-probability blocks store nothing.
pub fn class_extend(x: &PpmiMatrix, p: &ClassProbabilityTable) -> Result<PpmiMatrix> {
    if x.provenance() != Provenance::Plain {
        return Err(Error::config("class_extend expects a plain PPMI matrix"));
    }
    if x.nrows() != p.n_words() {
        return Err(Error::Dimension(format!(
            "PPMI has {} rows, class table has {}",
            x.nrows(),
            p.n_words()
        )));
    }
    let n_classes = p.n_classes();
    if n_classes == 0 {
        return Err(Error::Dimension("class table has no classes".into()));
    }
    let m = x.ncols();
    let rows = (0..x.nrows())
        .map(|i| {
            let mut row = Vec::new();
            for (j, &pij) in p.row(i).iter().enumerate() {
                if pij > 0.0 {
                    row.extend(
                        x.matrix()
                            .row(i)
                            .map(|(c, v)| (j * m + c, pij * v))
                            .filter(|&(_, v)| v > 0.0),
                    );
                }
            }
            row
        })
        .collect();
    PpmiMatrix::new(
        CsrMatrix::from_sorted_rows(m * n_classes, rows),
        Provenance::ClassExtended { n_classes },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccur::accumulate;
    use crate::context::WeightedPair;
    use proptest::prelude::*;

    fn from_dense(rows: &[&[f64]]) -> CooccurrenceMatrix {
        let n = rows.len();
        let pairs = rows.iter().enumerate().flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .map(move |(c, &v)| WeightedPair::new(r, c, v))
        });
        accumulate(pairs, n).unwrap()
    }

    #[test]
    fn pmi_of_diagonal() {
        let x = from_dense(&[&[2.0, 0.0], &[0.0, 2.0]]);
        let p = pmi(&x).unwrap();
        assert!((p.get(0, 0) - 2f64.ln()).abs() < 1e-12);
        assert_eq!(p.nnz(), 2);
        let pp = ppmi(&x).unwrap();
        assert_eq!(pp.nnz(), 2);
        assert!((pp.matrix().get(1, 1) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn uniform_counts_are_independent() {
        let x = from_dense(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let p = pmi(&x).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
        assert_eq!(ppmi(&x).unwrap().nnz(), 0);
    }

    #[test]
    fn negative_pmi_is_dropped() {
        let x = from_dense(&[&[4.0, 1.0], &[1.0, 4.0]]);
        let p = pmi(&x).unwrap();
        assert!((p.get(0, 1) - 0.4f64.ln()).abs() < 1e-15);
        let pp = ppmi(&x).unwrap();
        assert_eq!(pp.matrix().get(0, 1), 0.0);
        assert_eq!(pp.nnz(), 2);
    }

    #[test]
    fn zero_total_is_an_error() {
        assert!(pmi(&CooccurrenceMatrix::zeros(3)).is_err());
    }

    #[test]
    fn class_probability_rows() {
        let w = WordClassMatrix::from_rows(&[vec![2, 0], vec![3, 3], vec![0, 0]]).unwrap();
        let p = class_probabilities(&w);
        assert_eq!(p.row(0), &[1.0, 0.0]);
        assert_eq!(p.row(1), &[0.5, 0.5]);
        assert_eq!(p.row(2), &[0.0, 0.0]);
    }

    fn plain(rows: Vec<Vec<(usize, f64)>>, ncols: usize) -> PpmiMatrix {
        PpmiMatrix::new(CsrMatrix::from_sorted_rows(ncols, rows), Provenance::Plain).unwrap()
    }

    #[test]
    fn extension_examples() {
        let x = plain(vec![vec![(0, 2.0), (1, 4.0)], vec![]], 2);
        let one = ClassProbabilityTable::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        assert_eq!(class_extend(&x, &one).unwrap().matrix(), x.matrix());

        let p = ClassProbabilityTable::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let e = class_extend(&x, &p).unwrap();
        assert_eq!(e.ncols(), 4);
        assert_eq!(e.matrix().to_dense().row(0).iter().copied().collect::<Vec<_>>(), vec![2.0, 4.0, 0.0, 0.0]);

        let half = ClassProbabilityTable::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let e = class_extend(&x, &half).unwrap();
        assert_eq!(e.matrix().to_dense().row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 2.0, 1.0, 2.0]);
        assert_eq!(e.provenance(), Provenance::ClassExtended { n_classes: 2 });
        assert_eq!(e.matrix().row_nnz(1), 0);
    }

    #[test]
    fn extension_dimension_mismatch() {
        let x = plain(vec![vec![(0, 1.0)]], 1);
        let p = ClassProbabilityTable::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        assert!(matches!(class_extend(&x, &p), Err(Error::Dimension(_))));
    }

    proptest! {
        #[test]
        fn pmi_is_scale_invariant(
            cells in prop::collection::vec(prop::option::of(1u32..20), 16),
            scale in 0.01f64..100.0,
        ) {
            let pairs: Vec<WeightedPair> = cells.iter().enumerate()
                .filter_map(|(k, c)| c.map(|c| WeightedPair::new(k / 4, k % 4, c as f64)))
                .collect();
            prop_assume!(!pairs.is_empty());
            let a = pmi(&accumulate(pairs.iter().copied(), 4).unwrap()).unwrap();
            let scaled = pairs.iter().map(|p| WeightedPair::new(p.target, p.context, p.weight * scale));
            let b = pmi(&accumulate(scaled, 4).unwrap()).unwrap();
            for ((_, _, x), (_, _, y)) in a.triplets().zip(b.triplets()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn extension_nnz(
            rows in prop::collection::vec(prop::collection::btree_map(0usize..6, 0.1f64..3.0, 0..6), 1..6),
            weights in prop::collection::vec(prop::collection::vec(0u64..4, 3), 6),
        ) {
            let n = rows.len();
            let x = plain(rows.into_iter().map(|r| r.into_iter().collect()).collect(), 6);
            let w = WordClassMatrix::from_rows(&weights[..n]).unwrap();
            let p = class_probabilities(&w);
            let e = class_extend(&x, &p).unwrap();
            for i in 0..n {
                let live = p.row(i).iter().filter(|&&q| q > 0.0).count();
                prop_assert_eq!(e.matrix().row_nnz(i), x.matrix().row_nnz(i) * live);
            }
        }
    }
}
