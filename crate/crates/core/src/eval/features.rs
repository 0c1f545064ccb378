use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::corpus::Vocabulary;
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DocFeature {
    pub doc_id: String,
    pub class_id: Option<usize>,
    pub vector: DVector<f64>,
}

/// Mean of the embedding rows of in-vocabulary tokens, zero when none.
pub fn doc_embedding<S: AsRef<str>>(
    tokens: &[S],
    e: &EmbeddingMatrix,
    vocab: &Vocabulary,
) -> DVector<f64> {
    let mut sum = DVector::zeros(e.dim());
    let mut n = 0usize;
    for t in tokens {
        if let Some(id) = vocab.id(t.as_ref()) {
            sum += e.matrix().row(id).transpose();
            n += 1;
        }
    }
    if n > 0 {
        sum /= n as f64;
    }
    sum
}

/// Stacked document features, one row per document.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub doc_ids: Vec<String>,
    pub features: DMatrix<f64>,
    pub labels: Vec<usize>,
}

impl FeatureSet {
    pub fn from_docs(docs: &[DocFeature]) -> Self {
        let d = docs.first().map_or(0, |f| f.vector.len());
        let mut features = DMatrix::zeros(docs.len(), d);
        for (i, f) in docs.iter().enumerate() {
            features.set_row(i, &f.vector.transpose());
        }
        FeatureSet {
            doc_ids: docs.iter().map(|f| f.doc_id.clone()).collect(),
            features,
            labels: docs.iter().map(|f| f.class_id.unwrap_or(0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// `label<TAB>v1,v2,...` per document.
pub fn write_features<W: Write>(mut out: W, set: &FeatureSet) -> Result<()> {
    for (i, label) in set.labels.iter().enumerate() {
        let cells: Vec<String> = set.features.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{label}\t{}", cells.join(","))?;
    }
    Ok(())
}

/// The `k` most cosine-similar words to `query`, excluding itself. Ties go
/// to the lower id; zero rows have similarity 0.
pub fn nearest_neighbors(
    e: &EmbeddingMatrix,
    vocab: &Vocabulary,
    query: &str,
    k: usize,
) -> Result<Vec<(usize, f64)>> {
    let q = vocab
        .id(query)
        .filter(|&id| id < e.len())
        .ok_or_else(|| Error::UnknownWord(query.to_string()))?;
    nearest_to_row(e, q, k)
}

/// Like [`nearest_neighbors`], with the query given by its row.
pub fn nearest_to_row(e: &EmbeddingMatrix, q: usize, k: usize) -> Result<Vec<(usize, f64)>> {
    if q >= e.len() {
        return Err(Error::OutOfRange { id: q, size: e.len() });
    }
    let qv = e.matrix().row(q);
    let qn = qv.norm();
    if qn == 0.0 {
        return Err(Error::ZeroVector(e.words()[q].clone()));
    }
    let mut sims: Vec<(usize, f64)> = (0..e.len())
        .filter(|&i| i != q)
        .map(|i| {
            let r = e.matrix().row(i);
            let n = r.norm();
            let s = if n == 0.0 { 0.0 } else { qv.dot(&r) / (qn * n) };
            (i, s)
        })
        .collect();
    sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    sims.truncate(k);
    Ok(sims)
}
