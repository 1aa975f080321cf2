//! Directed social regard (DSR) toolkit core.
//!
//! Everything in this crate is pure computation over in-memory values and
//! builds without `std`: span algebra and the BIO codec, annotation
//! aggregation with Krippendorff's alpha, strict/token span evaluation, the
//! span regard-scoring head with its masked loss and optimizer, and the corpus
//! comparison analytics. File formats, the annotation service and the CLI live
//! in the `dsr-workbench` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agreement;
pub mod analytics;
pub mod bio;
mod error;
pub mod hash;
pub mod scorer;
pub mod spaneval;
pub mod stats;
pub mod tokenize;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    Corpus, Dimension, Provenance, RaterTally, RegardVector, ScoredSpan, Span, SpanKind, Text,
};
