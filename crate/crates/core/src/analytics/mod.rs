//! Corpus comparison analytics over scored spans.

mod bins;
mod histogram;
mod labels;
mod lexicon;
mod logodds;
mod targets;
mod themes;

pub use bins::{bin_high_low, compare_bins, BinComparison};
pub use histogram::{histogram, Histogram};
pub use labels::{label_spans, threshold_labels, LabelSet, LabeledSpan, RegardLabel};
pub use lexicon::{Category, CategoryLexicon};
pub use logodds::{attribute_log_odds, AttributePredicate, LogOdds};
pub use targets::{target_deltas, TargetDelta};
pub use themes::{pairwise_themes, ThemeEdge, ThemeGraph, ThemeNode, ThemePattern};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticsConfig {
    /// Intensity cut turning scores into labels.
    pub sigma: f64,
    pub min_target_count: usize,
    pub top_k_targets: usize,
    pub top_k_pairs: usize,
    /// Add 0.5 to every cell of a table with a zero cell before taking odds.
    pub haldane: bool,
}

impl Default for AnalyticsConfig {
    fn default() -> Self {
        Self {
            sigma: 0.15,
            min_target_count: 20,
            top_k_targets: 15,
            top_k_pairs: 40,
            haldane: true,
        }
    }
}

impl AnalyticsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::InvalidConfig("sigma must lie in (0, 1)".into()));
        }
        if self.min_target_count == 0 || self.top_k_targets == 0 || self.top_k_pairs == 0 {
            return Err(Error::InvalidConfig("counts must be positive".into()));
        }
        Ok(())
    }
}
