use std::io::BufRead;
use std::path::Path;

use dsr_core::{Corpus, Span, SpanKind};
use serde::Deserialize;

use super::{jsonl_lines, line_error, open, Result};

#[derive(Deserialize)]
struct SpanIn {
    start: usize,
    end: usize,
    kind: String,
}

// extra corpus fields such as content or scores are accepted and ignored
#[derive(Deserialize)]
struct LineIn {
    id: String,
    #[serde(default)]
    spans: Vec<SpanIn>,
}

/// Parses predicted spans, resolving each against the text of the same id in
/// `gold`.
pub fn parse_predictions<R: BufRead>(input: R, source_name: &str, gold: &Corpus) -> Result<Vec<Span>> {
    let mut out = Vec::new();
    for item in jsonl_lines(input, source_name) {
        let (line, raw) = item?;
        let err = |e: String| line_error(source_name, line, e);
        let rec: LineIn = serde_json::from_str(&raw).map_err(|e| err(e.to_string()))?;
        let text = gold
            .text(&rec.id)
            .ok_or_else(|| err(format!("text `{}` is not in the gold corpus", rec.id)))?;
        for s in rec.spans {
            let kind = SpanKind::parse(&s.kind).ok_or_else(|| err(format!("unknown span kind `{}`", s.kind)))?;
            out.push(Span::new(text, s.start, s.end, kind).map_err(|e| err(e.to_string()))?);
        }
    }
    Ok(out)
}

pub fn read_predictions(path: &Path, gold: &Corpus) -> Result<Vec<Span>> {
    parse_predictions(open(path)?, &path.display().to_string(), gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsr_core::Text;

    #[test]
    fn spans_resolve_against_gold_text() {
        let gold = Corpus::new("g", vec![Text::new("a", "they hurt")], vec![]).unwrap();
        let spans = parse_predictions(r#"{"id":"a","spans":[{"start":5,"end":9,"kind":"TOP"}]}"#.as_bytes(), "p", &gold).unwrap();
        assert_eq!(spans[0].surface, "hurt");
        assert!(parse_predictions(r#"{"id":"b","spans":[]}"#.as_bytes(), "p", &gold).is_err());
        assert!(parse_predictions(r#"{"id":"a","spans":[{"start":5,"end":10,"kind":"topic"}]}"#.as_bytes(), "p", &gold).is_err());
    }
}
