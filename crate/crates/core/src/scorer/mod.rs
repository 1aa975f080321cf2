//! Span regard scoring.
//!
//! A text is embedded once into an `n_tokens x h` matrix, each span is pooled
//! to a single `h`-vector, and a two-layer tanh head maps the pooled vectors to
//! three scores in (-1, 1). Training minimizes the squared error over the
//! entries a span's mask marks as labelled; Topic spans contribute only their
//! Oppose–Advocate entry.

mod augment;
mod embed;
mod evaluate;
mod gradcheck;
mod head;
mod train;

pub use augment::{augment_debias, AugmentedText};
pub use embed::{contextualize, embed_test, raw_token_row, EmbeddedText};
pub use evaluate::{evaluate_scores, ScoreFit};
pub use gradcheck::grad_check;
pub use head::{loss, Gradients, ScoringHead};
pub use train::{train, LossHistory, TrainingBatch};

use alloc::format;
use core::num::NonZeroUsize;

use crate::error::{Error, Result};
use crate::tokenize::covered_tokens;
use crate::types::Span;

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerConfig {
    /// Embedding width.
    pub h: usize,
    /// Maximum tokens per text.
    pub text_max: usize,
    /// Maximum spans per text.
    pub span_max: usize,
    /// Hidden layer width.
    pub hidden: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub epochs: usize,
    /// `None` trains on the full dataset each step.
    pub batch_size: Option<NonZeroUsize>,
    pub seed: u64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self {
            h: 1024,
            text_max: 512,
            span_max: 200,
            hidden: 256,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            epochs: 20,
            batch_size: None,
            seed: 7,
        }
    }
}

impl ScorerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("{what} must be positive")));
        if self.h == 0 {
            return bad("h");
        }
        if self.text_max == 0 {
            return bad("text_max");
        }
        if self.span_max == 0 {
            return bad("span_max");
        }
        if self.hidden == 0 {
            return bad("hidden");
        }
        if !self.lr.is_finite() || self.lr < 0.0 {
            return Err(Error::InvalidConfig("lr must be finite and non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidConfig("beta1 and beta2 must lie in [0, 1)".into()));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return bad("eps");
        }
        Ok(())
    }
}

/// Mean of the embedding rows of every token intersecting `span`.
pub fn pool_span(embedded: &EmbeddedText, span: &Span) -> Result<alloc::vec::Vec<f64>> {
    let mut pooled = alloc::vec![0.0; embedded.h];
    let mut count = 0usize;
    for i in covered_tokens(&embedded.tokens, span.start, span.end) {
        for (acc, v) in pooled.iter_mut().zip(embedded.row(i)) {
            *acc += v;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoOverlappingToken {
            text_id: span.text_id.clone(),
            start: span.start,
            end: span.end,
        });
    }
    let scale = count as f64;
    for v in &mut pooled {
        *v /= scale;
    }
    Ok(pooled)
}
