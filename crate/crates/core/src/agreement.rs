//! Annotation aggregation and inter-annotator agreement.
//!
//! A unit is one (text, span, dimension) triple. Each annotator's slider value
//! for a unit is an [`AnnotationEvent`]; the reference score is the mean over
//! annotators, and agreement is Krippendorff's alpha with the interval metric.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{Corpus, Dimension, Provenance, RegardVector, ScoredSpan, SpanKind};

/// Default cut on the per-unit sample standard deviation.
pub const DEFAULT_SD_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationEvent {
    pub annotator_id: String,
    pub text_id: String,
    pub start: usize,
    pub end: usize,
    pub kind: SpanKind,
    pub dimension: Dimension,
    pub score: f64,
    /// Milliseconds since the Unix epoch, UTC.
    pub timestamp_ms: i64,
}

impl AnnotationEvent {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.score) {
            return Err(Error::ScoreOutOfRange(self.score));
        }
        if !self.kind.allows(self.dimension) {
            return Err(Error::IllegalDimension {
                kind: self.kind,
                dim: self.dimension,
            });
        }
        Ok(())
    }

    pub fn unit(&self) -> UnitKey {
        UnitKey {
            text_id: self.text_id.clone(),
            start: self.start,
            end: self.end,
            kind: self.kind,
            dimension: self.dimension,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitKey {
    pub text_id: String,
    pub start: usize,
    pub end: usize,
    pub kind: SpanKind,
    pub dimension: Dimension,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedUnit {
    pub unit: UnitKey,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Aggregation {
    /// Spans whose units all passed the filter, in corpus order.
    pub spans: Vec<ScoredSpan>,
    /// Rejected units, highest standard deviation first.
    pub flagged: Vec<FlaggedUnit>,
}

/// Mean of `values` summed in sorted order, so the result does not depend on
/// the order events arrived in.
fn stable_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_sd(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    libm::sqrt(ss / (values.len() - 1) as f64)
}

/// Averages slider scores into reference scores and filters noisy units.
///
/// A unit with at least two scores whose sample standard deviation exceeds
/// `sd_threshold` is flagged, and its span is left out of the output. A span
/// with events for some but not all of its dimensions is an error.
pub fn aggregate_scores(
    corpus: &Corpus,
    events: &[AnnotationEvent],
    sd_threshold: f64,
) -> Result<Aggregation> {
    if sd_threshold.is_nan() || sd_threshold < 0.0 {
        return Err(Error::InvalidConfig("sd_threshold must be >= 0".into()));
    }
    let known: BTreeMap<_, usize> = corpus
        .spans()
        .iter()
        .enumerate()
        .map(|(i, s)| ((s.span.text_id.as_str(), s.span.start, s.span.end, s.span.kind), i))
        .collect();

    let mut units: BTreeMap<UnitKey, Vec<f64>> = BTreeMap::new();
    for e in events {
        e.validate()?;
        if !known.contains_key(&(e.text_id.as_str(), e.start, e.end, e.kind)) {
            return Err(Error::UnknownSpan {
                text_id: e.text_id.clone(),
                start: e.start,
                end: e.end,
                kind: e.kind,
            });
        }
        units.entry(e.unit()).or_default().push(e.score);
    }

    let mut per_span: BTreeMap<usize, [Option<f64>; 3]> = BTreeMap::new();
    let mut rejected: BTreeMap<usize, ()> = BTreeMap::new();
    let mut flagged = Vec::new();
    for (unit, mut scores) in units {
        let idx = known[&(unit.text_id.as_str(), unit.start, unit.end, unit.kind)];
        let mean = stable_mean(&mut scores);
        let sd = sample_sd(&scores, mean);
        if scores.len() >= 2 && sd > sd_threshold {
            rejected.insert(idx, ());
            flagged.push(FlaggedUnit {
                unit,
                n: scores.len(),
                mean,
                sd,
            });
        } else {
            per_span.entry(idx).or_default()[unit.dimension.index()] = Some(mean);
        }
    }
    flagged.sort_by(|a, b| b.sd.total_cmp(&a.sd).then_with(|| a.unit.cmp(&b.unit)));

    let mut spans = Vec::new();
    for (idx, means) in per_span {
        if rejected.contains_key(&idx) {
            continue;
        }
        let span = &corpus.spans()[idx].span;
        let mut scores = [0.0; 3];
        for dim in span.kind.dimensions() {
            scores[dim.index()] = means[dim.index()].ok_or_else(|| Error::IncompleteSpan {
                text_id: span.text_id.clone(),
                start: span.start,
                end: span.end,
                kind: span.kind,
                dim,
            })?;
        }
        let regard = RegardVector::new(scores, span.kind.mask())?;
        spans.push(ScoredSpan::new(span.clone(), regard, Provenance::HumanAggregate)?);
    }
    Ok(Aggregation { spans, flagged })
}

/// Krippendorff's alpha with the interval metric `(v - v')^2`.
///
/// Units with fewer than two values are not pairable and are ignored. Uses
/// the identity `sum_{i != j} (v_i - v_j)^2 = 2 m sum_i (v_i - mean)^2`, so
/// each unit costs linear time.
pub fn krippendorff_alpha<U: AsRef<[f64]>>(units: &[U]) -> Result<f64> {
    let pairable: Vec<&[f64]> = units
        .iter()
        .map(AsRef::as_ref)
        .filter(|u| u.len() >= 2)
        .collect();
    if pairable.is_empty() {
        return Err(Error::UndefinedAlpha);
    }
    if pairable.iter().any(|u| u.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("alpha input"));
    }

    let mut within = 0.0;
    let mut n = 0usize;
    for u in &pairable {
        n += u.len();
        if u.iter().all(|v| *v == u[0]) {
            continue;
        }
        let m = u.len() as f64;
        let mean = u.iter().sum::<f64>() / m;
        let ss: f64 = u.iter().map(|v| (v - mean) * (v - mean)).sum();
        within += 2.0 * m * ss / (m - 1.0);
    }
    if within == 0.0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let grand = pairable.iter().flat_map(|u| u.iter()).sum::<f64>() / nf;
    let total_ss: f64 = pairable
        .iter()
        .flat_map(|u| u.iter())
        .map(|v| (v - grand) * (v - grand))
        .sum();
    let observed = within / nf;
    let expected = 2.0 * nf * total_ss / (nf * (nf - 1.0));
    Ok(1.0 - observed / expected)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionAgreement {
    pub alpha: f64,
    pub n_scores: usize,
    pub n_units: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgreementReport {
    /// Dimensions where alpha is defined.
    pub per_dimension: BTreeMap<Dimension, DimensionAgreement>,
    /// Alpha over the pooled unit set of all dimensions.
    pub micro_alpha: Option<f64>,
    pub n_scores: usize,
    pub n_units: usize,
}

fn group_units(events: &[&AnnotationEvent]) -> BTreeMap<UnitKey, Vec<f64>> {
    let mut units: BTreeMap<UnitKey, Vec<f64>> = BTreeMap::new();
    for e in events {
        units.entry(e.unit()).or_default().push(e.score);
    }
    units
}

/// Per-dimension and micro alpha over annotation events.
pub fn agreement_report(events: &[AnnotationEvent]) -> Result<AgreementReport> {
    for e in events {
        e.validate()?;
    }
    let mut report = AgreementReport::default();
    for dim in Dimension::ALL {
        let subset: Vec<&AnnotationEvent> = events.iter().filter(|e| e.dimension == dim).collect();
        let units = group_units(&subset);
        let values: Vec<Vec<f64>> = units.into_values().collect();
        if let Ok(alpha) = krippendorff_alpha(&values) {
            report.per_dimension.insert(
                dim,
                DimensionAgreement {
                    alpha,
                    n_scores: subset.len(),
                    n_units: values.len(),
                },
            );
        }
    }
    let all: Vec<&AnnotationEvent> = events.iter().collect();
    let units: Vec<Vec<f64>> = group_units(&all).into_values().collect();
    report.n_scores = events.len();
    report.n_units = units.len();
    report.micro_alpha = krippendorff_alpha(&units).ok();
    Ok(report)
}
