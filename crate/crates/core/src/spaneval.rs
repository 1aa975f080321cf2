//! Strict span-level and token-level evaluation of predicted spans.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tokenize::{covered_tokens, tokenize, Token};
use crate::types::{Span, SpanKind, Text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn prf(&self) -> Prf {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Scored {
    pub counts: Counts,
    pub prf: Prf,
}

impl From<Counts> for Scored {
    fn from(counts: Counts) -> Self {
        Self {
            counts,
            prf: counts.prf(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    /// Strict span scores per kind.
    pub per_label: BTreeMap<SpanKind, Scored>,
    pub micro_span: Scored,
    /// Token scores per kind.
    pub token_per_label: BTreeMap<SpanKind, Scored>,
    pub micro_token: Scored,
}

fn set_counts<T: Ord>(gold: &BTreeSet<T>, pred: &BTreeSet<T>) -> Counts {
    let tp = gold.intersection(pred).count();
    Counts {
        tp,
        fp: pred.len() - tp,
        fn_: gold.len() - tp,
    }
}

/// Scores `predicted` against `gold`.
///
/// Span level credits only exact `(start, end, kind)` matches. Token level
/// expands every span to the tokens it touches and compares
/// `(text, token, kind)` triples; tokens outside every span are not counted.
pub fn evaluate_spans(texts: &[Text], gold: &[Span], predicted: &[Span]) -> Result<EvalReport> {
    let tokens: BTreeMap<&str, Vec<Token>> = texts
        .iter()
        .map(|t| (t.id.as_str(), tokenize(&t.content)))
        .collect();

    type SpanKey<'a> = (&'a str, usize, usize);
    type TokenKey<'a> = (&'a str, usize);
    type Groups<'a> = BTreeMap<SpanKind, (BTreeSet<SpanKey<'a>>, BTreeSet<TokenKey<'a>>)>;
    let collect = |spans: &'_ [Span]| -> Result<Groups<'_>> {
        let mut out: BTreeMap<SpanKind, (BTreeSet<_>, BTreeSet<_>)> = BTreeMap::new();
        for s in spans {
            let (id, toks) = tokens
                .get_key_value(s.text_id.as_str())
                .ok_or_else(|| Error::UnknownText(s.text_id.clone()))?;
            let entry = out.entry(s.kind).or_default();
            entry.0.insert((*id, s.start, s.end));
            for t in covered_tokens(toks, s.start, s.end) {
                entry.1.insert((*id, t));
            }
        }
        Ok(out)
    };
    let gold_sets = collect(gold)?;
    let pred_sets = collect(predicted)?;

    let empty = (BTreeSet::new(), BTreeSet::new());
    let mut report = EvalReport::default();
    let mut micro_span = Counts::default();
    let mut micro_token = Counts::default();
    for kind in SpanKind::ALL {
        let g = gold_sets.get(&kind).unwrap_or(&empty);
        let p = pred_sets.get(&kind).unwrap_or(&empty);
        let span_counts = set_counts(&g.0, &p.0);
        let token_counts = set_counts(&g.1, &p.1);
        micro_span.add(span_counts);
        micro_token.add(token_counts);
        report.per_label.insert(kind, span_counts.into());
        report.token_per_label.insert(kind, token_counts.into());
    }
    report.micro_span = micro_span.into();
    report.micro_token = micro_token.into();
    Ok(report)
}
