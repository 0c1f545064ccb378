//! Dependency-based word embeddings (DWE) and their class-enhanced variant
//! (CEDWE): dependency-tree contexts, PPMI, row extension by per-class word
//! probabilities and randomized truncated SVD, plus a text-classification
//! evaluation harness.

pub mod context;
pub mod cooccur;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod ppmi;
pub mod sparse;
pub mod svd;
pub mod synthetic;

pub use error::{Error, Result};
