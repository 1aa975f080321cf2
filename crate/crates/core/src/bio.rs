//! BIO interchange codec for external span taggers.
//!
//! Overlapping spans cannot be expressed in BIO, so encoding flattens them:
//! Character spans win over Topic spans, then longer spans over shorter ones,
//! then earlier starts over later ones. A span is tagged in full or dropped.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::tokenize::Token;
use crate::types::{Span, SpanKind, Text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BioTag {
    Outside,
    Begin(SpanKind),
    Inside(SpanKind),
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = |k: &SpanKind| match k {
            SpanKind::Character => "CHAR",
            SpanKind::Topic => "TOP",
        };
        match self {
            BioTag::Outside => f.write_str("O"),
            BioTag::Begin(k) => write!(f, "B-{}", label(k)),
            BioTag::Inside(k) => write!(f, "I-{}", label(k)),
        }
    }
}

impl FromStr for BioTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(alloc::format!("unknown BIO tag `{s}`"));
        if s == "O" {
            return Ok(BioTag::Outside);
        }
        let (prefix, label) = s.split_once('-').ok_or_else(bad)?;
        let kind = match label {
            "CHAR" => SpanKind::Character,
            "TOP" => SpanKind::Topic,
            _ => return Err(bad()),
        };
        match prefix {
            "B" => Ok(BioTag::Begin(kind)),
            "I" => Ok(BioTag::Inside(kind)),
            _ => Err(bad()),
        }
    }
}

/// Token index range `[first, last]` exactly covered by `span`.
fn align(tokens: &[Token], span: &Span) -> Result<(usize, usize)> {
    let first = tokens.iter().position(|t| t.start == span.start);
    let last = tokens.iter().position(|t| t.end == span.end);
    match (first, last) {
        (Some(f), Some(l)) if f <= l => Ok((f, l)),
        _ => Err(Error::Alignment {
            text_id: span.text_id.clone(),
            start: span.start,
            end: span.end,
        }),
    }
}

/// Encodes spans as one BIO tag per token.
pub fn spans_to_bio(tokens: &[Token], spans: &[Span]) -> Result<Vec<BioTag>> {
    let mut placed: Vec<(&Span, usize, usize)> = Vec::with_capacity(spans.len());
    for s in spans {
        let (f, l) = align(tokens, s)?;
        placed.push((s, f, l));
    }
    placed.sort_by(|(a, _, _), (b, _, _)| {
        a.kind
            .cmp(&b.kind)
            .then(b.len().cmp(&a.len()))
            .then(a.start.cmp(&b.start))
    });

    let mut tags = vec![BioTag::Outside; tokens.len()];
    for (span, first, last) in placed {
        if tags[first..=last].iter().any(|t| *t != BioTag::Outside) {
            continue;
        }
        tags[first] = BioTag::Begin(span.kind);
        for t in &mut tags[first + 1..=last] {
            *t = BioTag::Inside(span.kind);
        }
    }
    Ok(tags)
}

/// Decodes BIO tags back into spans over `text`. A stray `I-X` (after `O` or
/// a different label) opens a new span as if it were `B-X`.
pub fn bio_to_spans(text: &Text, tokens: &[Token], tags: &[BioTag]) -> Result<Vec<Span>> {
    if tokens.len() != tags.len() {
        return Err(Error::LengthMismatch {
            expected: tokens.len(),
            found: tags.len(),
        });
    }
    let mut spans = Vec::new();
    let mut open: Option<(SpanKind, usize, usize)> = None;
    for (tok, tag) in tokens.iter().zip(tags) {
        match *tag {
            BioTag::Outside => {
                if let Some(o) = open.take() {
                    spans.push(o);
                }
            }
            BioTag::Begin(kind) => {
                if let Some(o) = open.replace((kind, tok.start, tok.end)) {
                    spans.push(o);
                }
            }
            BioTag::Inside(kind) => match open.as_mut() {
                Some((k, _, end)) if *k == kind => *end = tok.end,
                _ => {
                    if let Some(o) = open.replace((kind, tok.start, tok.end)) {
                        spans.push(o);
                    }
                }
            },
        }
    }
    if let Some(o) = open {
        spans.push(o);
    }
    spans
        .into_iter()
        .map(|(kind, start, end)| Span::new(text, start, end, kind))
        .collect()
}

/// Renders tags as whitespace-separated strings.
pub fn format_tags(tags: &[BioTag]) -> String {
    let mut out = String::new();
    for (i, t) in tags.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&alloc::format!("{t}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::tokenize;
    use BioTag::*;
    use SpanKind::*;

    fn span(text: &Text, start: usize, end: usize, kind: SpanKind) -> Span {
        Span::new(text, start, end, kind).unwrap()
    }

    #[test]
    fn disjoint_single_token_spans() {
        let t = Text::new("t", "they hurt children");
        let toks = tokenize(&t.content);
        let spans = [span(&t, 0, 4, Character), span(&t, 10, 18, Character)];
        assert_eq!(
            spans_to_bio(&toks, &spans).unwrap(),
            vec![Begin(Character), Outside, Begin(Character)]
        );
    }

    #[test]
    fn no_spans_is_all_outside() {
        let toks = tokenize("they hurt children");
        assert_eq!(spans_to_bio(&toks, &[]).unwrap(), vec![Outside; 3]);
    }

    #[test]
    fn nested_topic_loses_to_character() {
        // "they" (Char 0..4) nested in "they hurt" (Topic 0..9): the topic
        // cannot be tagged without the character's token, so it is dropped.
        let t = Text::new("t", "they hurt");
        let toks = tokenize(&t.content);
        let spans = [span(&t, 0, 9, Topic), span(&t, 0, 4, Character)];
        assert_eq!(spans_to_bio(&toks, &spans).unwrap(), vec![Begin(Character), Outside]);
    }

    #[test]
    fn longer_then_earlier_wins() {
        let t = Text::new("t", "a b c d");
        let toks = tokenize(&t.content);
        // same kind: the longer span (2..7) beats 0..3
        let spans = [span(&t, 0, 3, Topic), span(&t, 2, 7, Topic)];
        assert_eq!(
            spans_to_bio(&toks, &spans).unwrap(),
            vec![Outside, Begin(Topic), Inside(Topic), Inside(Topic)]
        );
        // equal length: the earlier start wins
        let spans = [span(&t, 2, 5, Topic), span(&t, 0, 3, Topic)];
        assert_eq!(
            spans_to_bio(&toks, &spans).unwrap(),
            vec![Begin(Topic), Inside(Topic), Outside, Outside]
        );
    }

    #[test]
    fn misaligned_span_is_named() {
        let t = Text::new("t", "children");
        let toks = tokenize(&t.content);
        let err = spans_to_bio(&toks, &[span(&t, 0, 5, Character)]).unwrap_err();
        assert_eq!(
            err,
            Error::Alignment {
                text_id: "t".into(),
                start: 0,
                end: 5
            }
        );
    }

    #[test]
    fn contiguous_tags_merge() {
        let t = Text::new("t", "E.U. countries .");
        let toks = tokenize(&t.content);
        let spans = bio_to_spans(&t, &toks, &[Begin(Character), Inside(Character), Outside]).unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].surface, "E.U. countries");
        assert_eq!(spans[0].kind, Character);
        assert!(bio_to_spans(&t, &toks, &[Outside; 3]).unwrap().is_empty());
    }

    #[test]
    fn stray_inside_opens_a_span() {
        let t = Text::new("t", "do this");
        let toks = tokenize(&t.content);
        let spans = bio_to_spans(&t, &toks, &[Outside, Inside(Topic)]).unwrap();
        assert_eq!(spans, vec![span(&t, 3, 7, Topic)]);
        // I-TOP right after B-CHAR also starts a new span
        let spans = bio_to_spans(&t, &toks, &[Begin(Character), Inside(Topic)]).unwrap();
        assert_eq!(spans, vec![span(&t, 0, 2, Character), span(&t, 3, 7, Topic)]);
    }

    #[test]
    fn tag_count_must_match() {
        let t = Text::new("t", "a b");
        let toks = tokenize(&t.content);
        assert_eq!(
            bio_to_spans(&t, &toks, &[Outside]),
            Err(Error::LengthMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn tag_strings() {
        for tag in [Outside, Begin(Character), Inside(Character), Begin(Topic), Inside(Topic)] {
            let s = alloc::format!("{tag}");
            assert_eq!(s.parse::<BioTag>().unwrap(), tag);
        }
        assert!("B-PER".parse::<BioTag>().is_err());
        assert_eq!(format_tags(&[Begin(Topic), Outside]), "B-TOP O");
    }
}
