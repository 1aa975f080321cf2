//! Texts, spans and regard vectors.
//!
//! All offsets are Unicode scalar-value indices into `Text::content`, never
//! byte offsets, so the same fixture means the same thing in every language
//! that reads it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Longest accepted text, in scalar values.
pub const DEFAULT_MAX_TEXT_CHARS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpanKind {
    Character,
    Topic,
}

impl SpanKind {
    pub const ALL: [SpanKind; 2] = [SpanKind::Character, SpanKind::Topic];

    /// Dimensions that carry human labels for this kind of span.
    pub fn mask(self) -> [bool; 3] {
        match self {
            SpanKind::Character => [true, true, true],
            SpanKind::Topic => [true, false, false],
        }
    }

    pub fn dimensions(self) -> impl Iterator<Item = Dimension> {
        let mask = self.mask();
        Dimension::ALL.into_iter().filter(move |d| mask[d.index()])
    }

    pub fn allows(self, dim: Dimension) -> bool {
        self.mask()[dim.index()]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpanKind::Character => "character",
            SpanKind::Topic => "topic",
        }
    }

    pub fn parse(s: &str) -> Option<SpanKind> {
        match s {
            "character" | "char" | "CHAR" => Some(SpanKind::Character),
            "topic" | "top" | "TOP" => Some(SpanKind::Topic),
            _ => None,
        }
    }
}

impl fmt::Display for SpanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the three bipolar regard axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    OpposeAdvocate,
    VictimizedAided,
    HarmfulHelpful,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [
        Dimension::OpposeAdvocate,
        Dimension::VictimizedAided,
        Dimension::HarmfulHelpful,
    ];

    pub fn index(self) -> usize {
        match self {
            Dimension::OpposeAdvocate => 0,
            Dimension::VictimizedAided => 1,
            Dimension::HarmfulHelpful => 2,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Dimension::OpposeAdvocate => "oa",
            Dimension::VictimizedAided => "va",
            Dimension::HarmfulHelpful => "hh",
        }
    }

    pub fn parse(s: &str) -> Option<Dimension> {
        match s.to_ascii_lowercase().as_str() {
            "oa" | "oppose_advocate" => Some(Dimension::OpposeAdvocate),
            "va" | "victimized_aided" => Some(Dimension::VictimizedAided),
            "hh" | "harmful_helpful" => Some(Dimension::HarmfulHelpful),
            _ => None,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Document-level rater votes for a binary attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RaterTally {
    pub positive: u32,
    pub negative: u32,
    pub total: u32,
}

impl RaterTally {
    pub fn new(positive: u32, negative: u32, total: u32) -> Result<Self> {
        if positive as u64 + negative as u64 > total as u64 {
            return Err(Error::InvalidConfig(format!(
                "rater tally {positive}+{negative} exceeds total {total}"
            )));
        }
        Ok(Self {
            positive,
            negative,
            total,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Text {
    pub id: String,
    pub content: String,
    pub source: String,
    pub doc_labels: BTreeMap<String, RaterTally>,
}

impl Text {
    pub fn new(id: impl Into<String>, content: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            content: content.into(),
            source: String::new(),
            doc_labels: BTreeMap::new(),
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn with_label(mut self, name: impl Into<String>, tally: RaterTally) -> Self {
        self.doc_labels.insert(name.into(), tally);
        self
    }

    /// Length in scalar values.
    pub fn char_len(&self) -> usize {
        self.content.chars().count()
    }

    pub fn validate(&self, max_chars: usize) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidText {
                id: self.id.clone(),
                reason: "empty id".into(),
            });
        }
        let len = self.char_len();
        if len > max_chars {
            return Err(Error::InvalidText {
                id: self.id.clone(),
                reason: format!("content has {len} characters, maximum is {max_chars}"),
            });
        }
        for (name, t) in &self.doc_labels {
            if t.positive as u64 + t.negative as u64 > t.total as u64 {
                return Err(Error::InvalidText {
                    id: self.id.clone(),
                    reason: format!("tally for `{name}` exceeds its total"),
                });
            }
        }
        Ok(())
    }

    /// Slice of `content` between two scalar-value offsets.
    pub fn slice(&self, start: usize, end: usize) -> Option<&str> {
        char_slice(&self.content, start, end)
    }
}

/// Substring between scalar-value offsets `start..end`.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut begin = None;
    let mut count = 0;
    for (byte, _) in s.char_indices() {
        if count == start {
            begin = Some(byte);
        }
        if count == end {
            return begin.map(|b| &s[b..byte]);
        }
        count += 1;
    }
    if count == end {
        let b = if start == count { s.len() } else { begin? };
        return Some(&s[b..]);
    }
    None
}

/// A typed character range inside a text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub text_id: String,
    pub start: usize,
    pub end: usize,
    pub kind: SpanKind,
    pub surface: String,
}

impl Span {
    /// Builds a span over `text`, taking its surface from the content.
    pub fn new(text: &Text, start: usize, end: usize, kind: SpanKind) -> Result<Self> {
        let surface = checked_surface(text, start, end)?;
        Ok(Self {
            text_id: text.id.clone(),
            start,
            end,
            kind,
            surface: surface.to_string(),
        })
    }

    pub fn validate(&self, text: &Text) -> Result<()> {
        if self.text_id != text.id {
            return Err(self.invalid("text id does not match"));
        }
        let surface = checked_surface(text, self.start, self.end)?;
        if surface != self.surface {
            return Err(self.invalid("surface does not match content"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.text_id == other.text_id && self.start < other.end && other.start < self.end
    }

    /// Identity of the span ignoring its surface.
    pub fn key(&self) -> (&str, usize, usize, SpanKind) {
        (&self.text_id, self.start, self.end, self.kind)
    }

    fn invalid(&self, reason: &str) -> Error {
        Error::InvalidSpan {
            text_id: self.text_id.clone(),
            start: self.start,
            end: self.end,
            reason: reason.into(),
        }
    }
}

fn checked_surface(text: &Text, start: usize, end: usize) -> Result<&str> {
    let err = |reason: String| Error::InvalidSpan {
        text_id: text.id.clone(),
        start,
        end,
        reason,
    };
    if start >= end {
        return Err(err("start must be before end".into()));
    }
    text.slice(start, end)
        .ok_or_else(|| err(format!("end exceeds text length {}", text.char_len())))
}

/// Three regard scores in [-1, 1] plus the applicability mask.
///
/// Scores outside the mask are always exactly `0.0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegardVector {
    scores: [f64; 3],
    mask: [bool; 3],
}

impl RegardVector {
    pub fn new(scores: [f64; 3], mask: [bool; 3]) -> Result<Self> {
        let mut out = [0.0; 3];
        for i in 0..3 {
            if mask[i] {
                let s = scores[i];
                if !(-1.0..=1.0).contains(&s) {
                    return Err(Error::ScoreOutOfRange(s));
                }
                out[i] = s;
            }
        }
        Ok(Self { scores: out, mask })
    }

    /// Scores for a span of `kind`; entries the kind does not carry are dropped.
    pub fn for_kind(kind: SpanKind, oa: f64, va: f64, hh: f64) -> Result<Self> {
        Self::new([oa, va, hh], kind.mask())
    }

    pub fn zeros(kind: SpanKind) -> Self {
        Self {
            scores: [0.0; 3],
            mask: kind.mask(),
        }
    }

    pub fn get(&self, dim: Dimension) -> Option<f64> {
        let i = dim.index();
        self.mask[i].then_some(self.scores[i])
    }

    pub fn oa(&self) -> f64 {
        self.scores[0]
    }

    pub fn va(&self) -> f64 {
        self.scores[1]
    }

    pub fn hh(&self) -> f64 {
        self.scores[2]
    }

    pub fn scores(&self) -> [f64; 3] {
        self.scores
    }

    pub fn mask(&self) -> [bool; 3] {
        self.mask
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    HumanAggregate,
    Model,
    /// Span awaiting annotation; its regard vector is all zeros.
    Unscored,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::HumanAggregate => "human",
            Provenance::Model => "model",
            Provenance::Unscored => "unscored",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "human" => Some(Provenance::HumanAggregate),
            "model" => Some(Provenance::Model),
            "unscored" => Some(Provenance::Unscored),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSpan {
    pub span: Span,
    pub regard: RegardVector,
    pub provenance: Provenance,
}

impl ScoredSpan {
    pub fn new(span: Span, regard: RegardVector, provenance: Provenance) -> Result<Self> {
        if regard.mask() != span.kind.mask() {
            return Err(Error::InvalidSpan {
                text_id: span.text_id.clone(),
                start: span.start,
                end: span.end,
                reason: format!("mask {:?} does not match a {} span", regard.mask(), span.kind),
            });
        }
        Ok(Self {
            span,
            regard,
            provenance,
        })
    }

    pub fn unscored(span: Span) -> Self {
        let regard = RegardVector::zeros(span.kind);
        Self {
            span,
            regard,
            provenance: Provenance::Unscored,
        }
    }

    pub fn is_scored(&self) -> bool {
        self.provenance != Provenance::Unscored
    }
}

/// A named collection of texts and their spans.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub name: String,
    texts: Vec<Text>,
    spans: Vec<ScoredSpan>,
    index: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, texts: Vec<Text>, spans: Vec<ScoredSpan>) -> Result<Self> {
        Self::with_max_chars(name, texts, spans, DEFAULT_MAX_TEXT_CHARS)
    }

    pub fn with_max_chars(
        name: impl Into<String>,
        texts: Vec<Text>,
        spans: Vec<ScoredSpan>,
        max_chars: usize,
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, t) in texts.iter().enumerate() {
            t.validate(max_chars)?;
            if index.insert(t.id.clone(), i).is_some() {
                return Err(Error::DuplicateText(t.id.clone()));
            }
        }
        for s in &spans {
            let &i = index
                .get(&s.span.text_id)
                .ok_or_else(|| Error::UnknownText(s.span.text_id.clone()))?;
            s.span.validate(&texts[i])?;
            if s.regard.mask() != s.span.kind.mask() {
                return Err(Error::InvalidSpan {
                    text_id: s.span.text_id.clone(),
                    start: s.span.start,
                    end: s.span.end,
                    reason: "mask does not match span kind".into(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            texts,
            spans,
            index,
        })
    }

    pub fn texts(&self) -> &[Text] {
        &self.texts
    }

    pub fn spans(&self) -> &[ScoredSpan] {
        &self.spans
    }

    pub fn text(&self, id: &str) -> Option<&Text> {
        self.index.get(id).map(|&i| &self.texts[i])
    }

    /// Spans of one text, in corpus order.
    pub fn spans_of<'a>(&'a self, text_id: &'a str) -> impl Iterator<Item = &'a ScoredSpan> + 'a {
        self.spans.iter().filter(move |s| s.span.text_id == text_id)
    }

    /// Spans grouped by text, following text order.
    pub fn spans_by_text(&self) -> Vec<(&Text, Vec<&ScoredSpan>)> {
        let mut groups: Vec<Vec<&ScoredSpan>> = self.texts.iter().map(|_| Vec::new()).collect();
        for s in &self.spans {
            groups[self.index[&s.span.text_id]].push(s);
        }
        self.texts.iter().zip(groups).collect()
    }

    pub fn into_parts(self) -> (String, Vec<Text>, Vec<ScoredSpan>) {
        (self.name, self.texts, self.spans)
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    /// Ids of all texts as a set.
    pub fn text_ids(&self) -> BTreeSet<&str> {
        self.texts.iter().map(|t| t.id.as_str()).collect()
    }
}
