use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::AnalyticsConfig;
use crate::stats::{median, welch_t};
use crate::types::Corpus;

#[derive(Debug, Clone, PartialEq)]
pub struct TargetDelta {
    pub target: String,
    pub n_in: usize,
    pub n_out: usize,
    pub median_in: f64,
    pub median_out: f64,
    /// `median_in - median_out` of Oppose–Advocate scores.
    pub delta: f64,
    /// Welch p-value; `None` when both samples are constant.
    pub p: Option<f64>,
}

fn oa_by_target(corpus: &Corpus, into: &mut BTreeMap<String, Vec<f64>>) {
    for s in corpus.spans().iter().filter(|s| s.is_scored()) {
        into.entry(s.span.surface.to_lowercase()).or_default().push(s.regard.oa());
    }
}

/// Targets whose median Oppose–Advocate score differs most between `corpus`
/// and the pooled `others`.
///
/// A target (lowercased surface) qualifies with at least `min_target_count`
/// spans on each side; the `top_k_targets` largest `|delta|` are returned.
pub fn target_deltas(corpus: &Corpus, others: &[&Corpus], config: &AnalyticsConfig) -> Vec<TargetDelta> {
    let mut inside = BTreeMap::new();
    oa_by_target(corpus, &mut inside);
    let mut outside = BTreeMap::new();
    for o in others {
        oa_by_target(o, &mut outside);
    }
    let mut out: Vec<TargetDelta> = inside
        .into_iter()
        .filter_map(|(target, a)| {
            let b = outside.get(&target)?;
            if a.len() < config.min_target_count || b.len() < config.min_target_count {
                return None;
            }
            let median_in = median(&a)?;
            let median_out = median(b)?;
            Some(TargetDelta {
                n_in: a.len(),
                n_out: b.len(),
                median_in,
                median_out,
                delta: median_in - median_out,
                p: welch_t(&a, b).ok().map(|w| w.p_two_sided),
                target,
            })
        })
        .collect();
    out.sort_by(|x, y| {
        y.delta
            .abs()
            .total_cmp(&x.delta.abs())
            .then_with(|| x.target.cmp(&y.target))
    });
    out.truncate(config.top_k_targets);
    out
}
