use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{ScoredSpan, Span, SpanKind, Text};

/// A template variant of a labelled text.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedText {
    pub text: Text,
    pub spans: Vec<ScoredSpan>,
    pub source_text_id: String,
    /// Index (into the source spans) of the span whose surface was replaced.
    pub replaced_span: usize,
    pub replacement: String,
}

/// Builds one variant per lexicon entry for every span of `text`, swapping the
/// span surface for the entry while the rest of the content and every score
/// stay fixed. Character spans draw from `char_lexicon`, Topic spans from
/// `topic_lexicon`.
///
/// Offsets after the edit shift by the length difference; spans containing
/// the replaced one stretch with it. Other spans overlapping the replaced
/// span have no surface left in the variant and are dropped from it.
pub fn augment_debias(
    text: &Text,
    spans: &[ScoredSpan],
    char_lexicon: &[String],
    topic_lexicon: &[String],
) -> Result<Vec<AugmentedText>> {
    if char_lexicon.is_empty() || topic_lexicon.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    for s in spans {
        s.span.validate(text)?;
    }
    let chars: Vec<char> = text.content.chars().collect();
    let mut out = Vec::new();
    for (si, target) in spans.iter().enumerate() {
        let lexicon = match target.span.kind {
            SpanKind::Character => char_lexicon,
            SpanKind::Topic => topic_lexicon,
        };
        let (start, end) = (target.span.start, target.span.end);
        for (ei, entry) in lexicon.iter().enumerate() {
            let entry_len = entry.chars().count();
            if entry_len == 0 {
                return Err(Error::EmptySurface);
            }
            let delta = entry_len as isize - (end - start) as isize;
            let shift = |x: usize| (x as isize + delta) as usize;

            let mut content: String = chars[..start].iter().collect();
            content.push_str(entry);
            content.extend(&chars[end..]);
            let mut variant = text.clone();
            variant.id = format!("{}~{}~{}", text.id, si, ei);
            variant.content = content;

            let mut new_spans = Vec::with_capacity(spans.len());
            for (oi, other) in spans.iter().enumerate() {
                let (s, e) = (other.span.start, other.span.end);
                let (ns, ne) = if oi == si {
                    (start, start + entry_len)
                } else if e <= start {
                    (s, e)
                } else if s >= end {
                    (shift(s), shift(e))
                } else if s <= start && e >= end {
                    (s, shift(e))
                } else {
                    continue;
                };
                let span = Span::new(&variant, ns, ne, other.span.kind)?;
                new_spans.push(ScoredSpan {
                    span,
                    regard: other.regard,
                    provenance: other.provenance,
                });
            }
            out.push(AugmentedText {
                text: variant,
                spans: new_spans,
                source_text_id: text.id.clone(),
                replaced_span: si,
                replacement: entry.to_string(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Provenance, RegardVector};
    use alloc::vec;

    fn scored(text: &Text, start: usize, end: usize, kind: SpanKind, oa: f64) -> ScoredSpan {
        ScoredSpan::new(
            Span::new(text, start, end, kind).unwrap(),
            RegardVector::for_kind(kind, oa, -0.25, 0.125).unwrap(),
            Provenance::HumanAggregate,
        )
        .unwrap()
    }

    fn lex(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_variant_per_entry() {
        let t = Text::new("t", "Russia blames the West");
        let spans = vec![scored(&t, 0, 6, SpanKind::Character, -0.5)];
        let out = augment_debias(&t, &spans, &lex(&["China", "Nigeria", "Brazil"]), &lex(&["x"])).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[1].text.content, "Nigeria blames the West");
        assert_eq!(out[1].source_text_id, "t");
    }

    #[test]
    fn later_spans_shift_by_length_delta() {
        let t = Text::new("t", "Russia blames the West");
        let spans = vec![
            scored(&t, 0, 6, SpanKind::Character, -0.5),
            scored(&t, 18, 22, SpanKind::Character, 0.3),
        ];
        let out = augment_debias(&t, &spans, &lex(&["World Health Organization"]), &lex(&["x"])).unwrap();
        let v = &out[0];
        assert_eq!(v.spans[1].span.start, 18 + 19);
        assert_eq!(v.spans[1].span.surface, "West");
        assert_eq!(v.spans[0].span.surface, "World Health Organization");
        assert_eq!(v.spans[1].regard, spans[1].regard);
    }

    #[test]
    fn identity_replacement_reproduces_source() {
        let t = Text::new("t", "they hurt children");
        let spans = vec![
            scored(&t, 0, 4, SpanKind::Character, -0.5),
            scored(&t, 5, 9, SpanKind::Topic, -0.4),
        ];
        let out = augment_debias(&t, &spans, &lex(&["they"]), &lex(&["hurt"])).unwrap();
        assert_eq!(out.len(), 2);
        for v in out {
            assert_eq!(v.text.content, t.content);
            let strip = |s: &ScoredSpan| (s.span.start, s.span.end, s.span.kind, s.span.surface.clone(), s.regard);
            assert_eq!(v.spans.iter().map(strip).collect::<Vec<_>>(), spans.iter().map(strip).collect::<Vec<_>>());
        }
    }

    #[test]
    fn containing_span_stretches_and_nested_span_drops() {
        let t = Text::new("t", "free speech for Russia now");
        let spans = vec![
            scored(&t, 0, 22, SpanKind::Topic, 0.2),
            scored(&t, 16, 22, SpanKind::Character, -0.1),
            scored(&t, 5, 11, SpanKind::Topic, 0.4),
        ];
        let out = augment_debias(&t, &spans, &lex(&["China"]), &lex(&["immigration"])).unwrap();
        // variant replacing "Russia": the containing topic stretches
        let v = out.iter().find(|v| v.replaced_span == 1).unwrap();
        assert_eq!(v.spans[0].span.surface, "free speech for China");
        // variant replacing the whole topic: the nested spans vanish
        let v = out.iter().find(|v| v.replaced_span == 0).unwrap();
        assert_eq!(v.text.content, "immigration now");
        assert_eq!(v.spans.len(), 1);
    }

    #[test]
    fn empty_inputs_rejected() {
        let t = Text::new("t", "they");
        let spans = vec![scored(&t, 0, 4, SpanKind::Character, 0.0)];
        assert_eq!(augment_debias(&t, &spans, &[], &lex(&["x"])), Err(Error::EmptyLexicon));
        assert_eq!(augment_debias(&t, &spans, &lex(&[""]), &lex(&["x"])), Err(Error::EmptySurface));
    }
}
