//! Corpus ingestion: tokenization, document-frequency statistics, local
//! views of an example, and anchor coverage.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A tokenized document: an ordered sequence of words.
///
/// `tokenize` produces lowercase alphanumeric tokens; documents built from
/// raw token lists (e.g. perturbed samples carrying the "UNK" marker) keep
/// their tokens verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    tokens: Vec<String>,
}

impl Document {
    /// Build a document from pre-tokenized words. Empty and whitespace
    /// tokens are rejected.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if tokens.iter().any(|t| t.is_empty() || t.chars().any(char::is_whitespace)) {
            return Err(Error::InvalidParameter(
                "document tokens must be non-empty and whitespace-free".into(),
            ));
        }
        Ok(Self { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Total token count `b`.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Lowercase the input and split on maximal runs of non-alphanumeric
/// characters, discarding empty fragments. All-punctuation input yields an
/// empty document.
pub fn tokenize(raw_text: &str) -> Document {
    let tokens = raw_text
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect();
    Document { tokens }
}

/// Document-frequency statistics of a fitted corpus.
///
/// `doc_freq[w]` counts the documents containing `w` at least once, never
/// the total number of occurrences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_docs: usize,
    pub doc_freq: BTreeMap<String, usize>,
}

impl CorpusStats {
    /// Inverse document frequency `ln((N+1)/(N_j+1)) + 1` for in-vocabulary
    /// words, 0 for everything else (natural log; out-of-vocabulary words
    /// thereby vanish from every TF-IDF coordinate).
    pub fn idf(&self, word: &str) -> f64 {
        match self.doc_freq.get(word) {
            Some(&nj) => ((self.n_docs as f64 + 1.0) / (nj as f64 + 1.0)).ln() + 1.0,
            None => 0.0,
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.doc_freq.contains_key(word)
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.doc_freq.keys().map(String::as_str)
    }
}

/// Count document frequencies over a corpus. Multiplicity within a document
/// does not inflate the counts.
pub fn fit_corpus(documents: &[Document]) -> Result<CorpusStats> {
    if documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
    for doc in documents {
        let mut seen: HashSet<&str> = HashSet::new();
        for token in doc.tokens() {
            if seen.insert(token) {
                *doc_freq.entry(token.clone()).or_insert(0) += 1;
            }
        }
    }
    Ok(CorpusStats { n_docs: documents.len(), doc_freq })
}

/// Fraction of corpus documents containing every word of the set.
pub fn coverage(anchor_words: &BTreeSet<String>, documents: &[Document]) -> Result<f64> {
    if anchor_words.is_empty() {
        return Err(Error::EmptyWordSet);
    }
    if documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let hits = documents
        .iter()
        .filter(|doc| {
            let present: HashSet<&str> = doc.tokens().iter().map(String::as_str).collect();
            anchor_words.iter().all(|w| present.contains(w.as_str()))
        })
        .count();
    Ok(hits as f64 / documents.len() as f64)
}

/// An example's distinct words in first-occurrence order, with their
/// multiplicities and IDF values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalView {
    words: Vec<String>,
    mult: Vec<u32>,
    idf: Vec<f64>,
    b: usize,
}

impl LocalView {
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn mult(&self) -> &[u32] {
        &self.mult
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    /// Number of distinct words `d`.
    pub fn d(&self) -> usize {
        self.words.len()
    }

    /// Total token count `b` (equals the sum of multiplicities).
    pub fn b(&self) -> usize {
        self.b
    }

    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }

    /// Build a view directly from (word, multiplicity, idf) triples. Intended
    /// for synthetic instances; `local_view` is the production path.
    pub fn from_parts(parts: Vec<(String, u32, f64)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyDocument);
        }
        let mut seen = HashSet::new();
        for (w, m, idf) in &parts {
            if !seen.insert(w.clone()) {
                return Err(Error::InvalidParameter(format!("duplicate word {w:?} in view")));
            }
            if *m == 0 {
                return Err(Error::InvalidParameter("multiplicities must be >= 1".into()));
            }
            if *idf < 0.0 {
                return Err(Error::InvalidParameter("idf must be >= 0".into()));
            }
        }
        let b = parts.iter().map(|(_, m, _)| *m as usize).sum();
        let (words, rest): (Vec<_>, Vec<_>) = parts.into_iter().map(|(w, m, i)| (w, (m, i))).unzip();
        let (mult, idf) = rest.into_iter().unzip();
        Ok(Self { words, mult, idf, b })
    }

    /// Number of candidate anchors `prod(min(m_j, cap)+1) - 1`, or `None` on
    /// overflow.
    pub fn search_space(&self, cap: Option<u32>) -> Option<u128> {
        let mut acc: u128 = 1;
        for &m in &self.mult {
            let m = cap.map_or(m, |c| m.min(c));
            acc = acc.checked_mul(m as u128 + 1)?;
        }
        Some(acc - 1)
    }
}

/// Extract the local view of an example against fitted statistics.
pub fn local_view(example: &Document, stats: &CorpusStats) -> Result<LocalView> {
    if example.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let mut words: Vec<String> = Vec::new();
    let mut mult: Vec<u32> = Vec::new();
    for token in example.tokens() {
        match words.iter().position(|w| w == token) {
            Some(i) => mult[i] += 1,
            None => {
                words.push(token.clone());
                mult.push(1);
            }
        }
    }
    let idf = words.iter().map(|w| stats.idf(w)).collect();
    Ok(LocalView { words, mult, idf, b: example.len() })
}

/// Read a corpus file: one document per line, or a CSV with a required
/// `text,label` header when the path ends in `.csv`. Returns the documents
/// and, for CSV input, the labels.
pub fn read_corpus_file(path: &Path) -> Result<(Vec<Document>, Option<Vec<bool>>)> {
    let raw = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        read_labeled_csv(&raw).map(|(docs, labels)| (docs, Some(labels)))
    } else {
        let docs = raw
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(tokenize)
            .collect::<Vec<_>>();
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok((docs, None))
    }
}

fn read_labeled_csv(raw: &str) -> Result<(Vec<Document>, Vec<bool>)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(raw.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "text" || &headers[1] != "label" {
        return Err(Error::InvalidParameter(
            "CSV corpus requires a `text,label` header".into(),
        ));
    }
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        docs.push(tokenize(record.get(0).unwrap_or_default()));
        let label = record.get(1).unwrap_or_default().trim();
        labels.push(matches!(label, "1" | "true" | "True" | "pos" | "positive"));
    }
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok((docs, labels))
}
