use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("document is empty")]
    EmptyDocument,

    #[error("word set is empty")]
    EmptyWordSet,

    #[error("invalid anchor: {0}")]
    InvalidAnchor(String),

    #[error("search space of {size} anchors exceeds cutoff {cutoff}; cap per-word multiplicities (--cap) or shorten the example")]
    SearchSpaceExceeded { size: u128, cutoff: usize },

    #[error("exact enumeration of {states} joint states exceeds cutoff {cutoff}; use the Monte-Carlo evaluation instead")]
    EnumerationExceeded { states: u128, cutoff: usize },

    #[error("the model classifies the example as 0; anchors explain positive predictions only")]
    NotPositivelyClassified,

    #[error("no feasible anchor at precision {0}: the evaluation function rejects even the full anchor")]
    NoFeasibleAnchor(f64),

    #[error("model has no input gradient")]
    NonDifferentiable,

    #[error("degenerate variance: every non-anchored contribution is zero")]
    DegenerateDenominator,

    #[error("training corpus must contain both classes")]
    SingleClassCorpus,

    #[error("no positively classified example in the corpus")]
    NoPositiveExamples,

    #[error("unknown proposition id: {0}")]
    UnknownProposition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
