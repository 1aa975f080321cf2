use alloc::string::String;

use crate::types::{Dimension, SpanKind};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("text `{id}`: {reason}")]
    InvalidText { id: String, reason: String },
    #[error("duplicate text id `{0}`")]
    DuplicateText(String),
    #[error("unknown text id `{0}`")]
    UnknownText(String),
    #[error("span {start}..{end} in text `{text_id}`: {reason}")]
    InvalidSpan {
        text_id: String,
        start: usize,
        end: usize,
        reason: String,
    },
    #[error("span {start}..{end} in text `{text_id}` is not aligned to token boundaries")]
    Alignment {
        text_id: String,
        start: usize,
        end: usize,
    },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("score {0} outside [-1, 1]")]
    ScoreOutOfRange(f64),
    #[error("dimension {dim} does not apply to {kind} spans")]
    IllegalDimension { kind: SpanKind, dim: Dimension },
    #[error("annotation references unknown {kind} span {start}..{end} in text `{text_id}`")]
    UnknownSpan {
        text_id: String,
        start: usize,
        end: usize,
        kind: SpanKind,
    },
    #[error("{kind} span {start}..{end} in text `{text_id}` has no annotations for {dim}")]
    IncompleteSpan {
        text_id: String,
        start: usize,
        end: usize,
        kind: SpanKind,
        dim: Dimension,
    },
    #[error("alpha is undefined: no unit has at least two scores")]
    UndefinedAlpha,
    #[error("text `{text_id}` has {tokens} tokens, more than the maximum of {max}")]
    Truncation {
        text_id: String,
        tokens: usize,
        max: usize,
    },
    #[error("text `{0}` has no tokens")]
    EmptyText(String),
    #[error("text `{text_id}`: embedding width {found}, expected {expected}")]
    WidthMismatch {
        text_id: String,
        expected: usize,
        found: usize,
    },
    #[error("text `{text_id}`: bad token layout: {reason}")]
    TokenLayout { text_id: String, reason: String },
    #[error("span {start}..{end} in text `{text_id}` overlaps no token")]
    NoOverlappingToken {
        text_id: String,
        start: usize,
        end: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("loss is undefined: every target entry is masked")]
    NoUnmaskedEntries,
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("replacement would produce an empty span surface")]
    EmptySurface,
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("contingency table has a zero margin")]
    ZeroMargin,
    #[error("degenerate samples: {0}")]
    DegenerateSamples(&'static str),
    #[error("category `{0}` has no members in one of the populations")]
    EmptyCategory(String),
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("text `{text_id}` has a zero rater total for `{label}`")]
    ZeroTotal { text_id: String, label: String },
    #[error("text `{text_id}` carries no tally for `{label}`")]
    MissingLabel { text_id: String, label: String },
    #[error("population is empty")]
    EmptyPopulation,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
