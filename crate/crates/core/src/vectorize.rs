//! TF-IDF vectorization, plain and l2-normalized.
//!
//! Vectors are sparse maps over the fitted vocabulary: a coordinate absent
//! from the map is zero. Out-of-vocabulary tokens (the replacement marker
//! "UNK" in particular, which the tokenizer can never produce) have zero IDF
//! and therefore never contribute, which is what makes replacing a word by
//! "UNK" indistinguishable from deleting it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusStats, Document};

/// Which vectorization a model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VectorizerKind {
    #[default]
    Plain,
    Normalized,
}

/// A sparse TF-IDF vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfVector {
    pub coords: BTreeMap<String, f64>,
    pub normalized: bool,
}

impl TfidfVector {
    pub fn get(&self, word: &str) -> f64 {
        self.coords.get(word).copied().unwrap_or(0.0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.coords.values().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Plain TF-IDF: coordinate `j` is `m_j(doc) * idf_j`. Empty documents map
/// to the zero vector.
pub fn tfidf(doc: &Document, stats: &CorpusStats) -> TfidfVector {
    let mut coords: BTreeMap<String, f64> = BTreeMap::new();
    for token in doc.tokens() {
        let idf = stats.idf(token);
        if idf > 0.0 {
            *coords.entry(token.clone()).or_insert(0.0) += idf;
        }
    }
    TfidfVector { coords, normalized: false }
}

/// l2-normalized TF-IDF. The all-zero vector maps to itself so that fully
/// out-of-vocabulary perturbations stay evaluable.
pub fn tfidf_normalized(doc: &Document, stats: &CorpusStats) -> TfidfVector {
    let mut v = tfidf(doc, stats);
    let norm = v.l2_norm();
    if norm > 0.0 {
        for value in v.coords.values_mut() {
            *value /= norm;
        }
    }
    v.normalized = true;
    v
}

/// Vectorize with the requested kind.
pub fn vectorize(kind: VectorizerKind, doc: &Document, stats: &CorpusStats) -> TfidfVector {
    match kind {
        VectorizerKind::Plain => tfidf(doc, stats),
        VectorizerKind::Normalized => tfidf_normalized(doc, stats),
    }
}
