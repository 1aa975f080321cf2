use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{AnalyticsConfig, CategoryLexicon};
use crate::error::{Error, Result};
use crate::types::{Corpus, SpanKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ThemePattern {
    /// A is harmful while B is victimized.
    Harm,
    /// A is helpful while B is aided.
    Help,
}

impl ThemePattern {
    pub fn as_str(self) -> &'static str {
        match self {
            ThemePattern::Harm => "harm",
            ThemePattern::Help => "help",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "harm" => Some(ThemePattern::Harm),
            "help" => Some(ThemePattern::Help),
            _ => None,
        }
    }
}

impl fmt::Display for ThemePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThemeNode {
    /// Character spans with this key across the corpus.
    pub frequency: usize,
    pub mean_oa: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThemeEdge {
    pub source: String,
    pub target: String,
    pub pattern: ThemePattern,
    /// Number of texts exhibiting the pattern for this pair.
    pub frequency: usize,
}

/// Targets as nodes, harm/help co-occurrence patterns as edges, edges ordered
/// by descending frequency.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThemeGraph {
    pub nodes: BTreeMap<String, ThemeNode>,
    pub edges: Vec<ThemeEdge>,
}

impl ThemeGraph {
    pub fn new(nodes: BTreeMap<String, ThemeNode>, edges: Vec<ThemeEdge>) -> Result<Self> {
        for n in nodes.values() {
            if n.frequency == 0 {
                return Err(Error::InvalidConfig("node frequency must be at least 1".into()));
            }
        }
        for e in &edges {
            if e.frequency == 0 {
                return Err(Error::InvalidConfig("edge frequency must be at least 1".into()));
            }
            for end in [&e.source, &e.target] {
                if !nodes.contains_key(end) {
                    return Err(Error::InvalidConfig(format!("edge endpoint `{end}` is not a node")));
                }
            }
        }
        Ok(Self { nodes, edges })
    }
}

/// Collects harm/help pairs within each text.
///
/// For every ordered pair of distinct Character spans (A, B) of a text,
/// `harm(A, B)` holds when `hh(A) <= -sigma` and `va(B) <= -sigma`, and
/// `help(A, B)` when `hh(A) >= sigma` and `va(B) >= sigma`. Endpoints are keyed
/// by their category display name when the lexicon matches, otherwise by the
/// lowercased surface. A text counts at most once per (pattern, A, B).
pub fn pairwise_themes(corpus: &Corpus, lexicon: &CategoryLexicon, config: &AnalyticsConfig) -> ThemeGraph {
    let sigma = config.sigma;
    let key = |surface: &str| -> String {
        match lexicon.categorize(surface) {
            Some(c) => c.display.clone(),
            None => surface.to_lowercase(),
        }
    };

    let mut node_scores: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut counts: BTreeMap<(ThemePattern, String, String), usize> = BTreeMap::new();
    for (_, spans) in corpus.spans_by_text() {
        let chars: Vec<(String, [f64; 3])> = spans
            .iter()
            .filter(|s| s.is_scored() && s.span.kind == SpanKind::Character)
            .map(|s| (key(&s.span.surface), s.regard.scores()))
            .collect();
        for (k, scores) in &chars {
            node_scores.entry(k.clone()).or_default().push(scores[0]);
        }
        let mut seen = BTreeSet::new();
        for (i, (a_key, a)) in chars.iter().enumerate() {
            for (j, (b_key, b)) in chars.iter().enumerate() {
                if i == j {
                    continue;
                }
                let (hh_a, va_b) = (a[2], b[1]);
                if hh_a <= -sigma && va_b <= -sigma {
                    seen.insert((ThemePattern::Harm, a_key.clone(), b_key.clone()));
                }
                if hh_a >= sigma && va_b >= sigma {
                    seen.insert((ThemePattern::Help, a_key.clone(), b_key.clone()));
                }
            }
        }
        for edge in seen {
            *counts.entry(edge).or_default() += 1;
        }
    }

    let mut edges: Vec<ThemeEdge> = counts
        .into_iter()
        .map(|((pattern, source, target), frequency)| ThemeEdge {
            source,
            target,
            pattern,
            frequency,
        })
        .collect();
    edges.sort_by(|x, y| {
        y.frequency
            .cmp(&x.frequency)
            .then(x.pattern.cmp(&y.pattern))
            .then_with(|| x.source.cmp(&y.source))
            .then_with(|| x.target.cmp(&y.target))
    });
    edges.truncate(config.top_k_pairs);

    let keep: BTreeSet<&str> = edges
        .iter()
        .flat_map(|e| [e.source.as_str(), e.target.as_str()])
        .collect();
    let nodes = node_scores
        .into_iter()
        .filter(|(k, _)| keep.contains(k.as_str()))
        .map(|(k, mut oa)| {
            oa.sort_by(f64::total_cmp);
            let mean = oa.iter().sum::<f64>() / oa.len() as f64;
            (
                k,
                ThemeNode {
                    frequency: oa.len(),
                    mean_oa: mean,
                },
            )
        })
        .collect();
    ThemeGraph { nodes, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Provenance, RegardVector, ScoredSpan, Span, Text};
    use alloc::vec;

    type Item<'a> = (&'a str, f64, f64, f64);

    fn corpus(entries: &[(&str, &[Item])]) -> Corpus {
        let mut texts = Vec::new();
        let mut spans = Vec::new();
        for (id, items) in entries {
            let content = items.iter().map(|i| i.0).collect::<Vec<_>>().join(" ");
            let t = Text::new(*id, content);
            let mut pos = 0;
            for (surface, oa, va, hh) in items.iter() {
                let len = surface.chars().count();
                let span = Span::new(&t, pos, pos + len, SpanKind::Character).unwrap();
                spans.push(ScoredSpan::new(span, RegardVector::for_kind(SpanKind::Character, *oa, *va, *hh).unwrap(), Provenance::Model).unwrap());
                pos += len + 1;
            }
            texts.push(t);
        }
        Corpus::new("c", texts, spans).unwrap()
    }

    #[test]
    fn harm_rule_applies_at_threshold() {
        let c = corpus(&[("t", &[("them", -0.5, 0.0, -0.3), ("me", 0.1, -0.2, 0.0)])]);
        let g = pairwise_themes(&c, &CategoryLexicon::default(), &AnalyticsConfig::default());
        assert_eq!(g.edges.len(), 1);
        let e = &g.edges[0];
        assert_eq!((e.source.as_str(), e.target.as_str(), e.pattern), ("them", "me/us", ThemePattern::Harm));
        assert_eq!(g.nodes["them"].mean_oa, -0.5);
    }

    #[test]
    fn below_threshold_no_edge() {
        let c = corpus(&[("t", &[("them", -0.5, 0.0, -0.1), ("me", 0.1, -0.2, 0.0)])]);
        let g = pairwise_themes(&c, &CategoryLexicon::default(), &AnalyticsConfig::default());
        assert!(g.edges.is_empty() && g.nodes.is_empty());
    }

    #[test]
    fn counted_once_per_text_and_help_coexists() {
        let c = corpus(&[
            ("a", &[("they", 0.0, 0.0, -0.5), ("them", 0.0, 0.0, -0.5), ("us", 0.0, -0.5, 0.0)]),
            ("b", &[("police", 0.4, 0.0, 0.5), ("us", 0.3, 0.6, 0.0)]),
            ("c", &[("police", 0.0, 0.0, -0.5), ("us", 0.0, -0.6, 0.0)]),
        ]);
        let g = pairwise_themes(&c, &CategoryLexicon::default(), &AnalyticsConfig::default());
        let find = |p, s: &str, t: &str| g.edges.iter().find(|e| e.pattern == p && e.source == s && e.target == t).map(|e| e.frequency);
        assert_eq!(find(ThemePattern::Harm, "them", "me/us"), Some(1));
        assert_eq!(find(ThemePattern::Help, "police", "me/us"), Some(1));
        assert_eq!(find(ThemePattern::Harm, "police", "me/us"), Some(1));
        assert_eq!(g.nodes["police"].frequency, 2);
    }

    #[test]
    fn top_k_prunes_nodes() {
        let c = corpus(&[
            ("a", &[("x", 0.0, 0.0, -0.5), ("y", 0.0, -0.5, 0.0)]),
            ("b", &[("x", 0.0, 0.0, -0.5), ("y", 0.0, -0.5, 0.0)]),
            ("c", &[("p", 0.0, 0.0, -0.5), ("q", 0.0, -0.5, 0.0)]),
        ]);
        let cfg = AnalyticsConfig { top_k_pairs: 1, ..AnalyticsConfig::default() };
        let g = pairwise_themes(&c, &CategoryLexicon::default(), &cfg);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.nodes.keys().collect::<Vec<_>>(), vec!["x", "y"]);
    }

    #[test]
    fn graph_validation() {
        let edge = ThemeEdge { source: "a".into(), target: "b".into(), pattern: ThemePattern::Harm, frequency: 1 };
        assert!(ThemeGraph::new(BTreeMap::new(), vec![edge]).is_err());
    }
}
