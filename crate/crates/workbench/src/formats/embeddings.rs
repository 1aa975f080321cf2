use std::io::BufRead;
use std::path::Path;

use dsr_core::scorer::EmbeddedText;
use dsr_core::tokenize::Token;
use serde::{Deserialize, Serialize};

use super::{jsonl_lines, line_error, open, write_file, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenRec {
    s: String,
    start: usize,
    end: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineIn {
    text_id: String,
    h: usize,
    tokens: Vec<TokenRec>,
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct LineOut<'a> {
    text_id: &'a str,
    h: usize,
    tokens: Vec<TokenRec>,
    rows: Vec<&'a [f64]>,
}

fn to_embedded(rec: LineIn, expected_h: Option<usize>) -> std::result::Result<EmbeddedText, String> {
    if let Some(h) = expected_h {
        if rec.h != h {
            return Err(format!("width {} but {h} was expected", rec.h));
        }
    }
    if rec.rows.len() != rec.tokens.len() {
        return Err(format!("{} rows for {} tokens", rec.rows.len(), rec.tokens.len()));
    }
    if let Some((i, row)) = rec.rows.iter().enumerate().find(|(_, r)| r.len() != rec.h) {
        return Err(format!("row {i} has width {}, expected {}", row.len(), rec.h));
    }
    let tokens = rec.tokens.into_iter().map(|t| Token::new(t.s, t.start, t.end)).collect();
    let matrix = rec.rows.into_iter().flatten().collect();
    EmbeddedText::new(rec.text_id, tokens, rec.h, matrix).map_err(|e| e.to_string())
}

/// Parses embedding JSONL. With `expected_h`, every record must have that
/// width.
pub fn parse_embeddings<R: BufRead>(input: R, source_name: &str, expected_h: Option<usize>) -> Result<Vec<EmbeddedText>> {
    let mut out = Vec::new();
    for item in jsonl_lines(input, source_name) {
        let (line, raw) = item?;
        let rec: LineIn = serde_json::from_str(&raw).map_err(|e| line_error(source_name, line, e))?;
        out.push(to_embedded(rec, expected_h).map_err(|e| line_error(source_name, line, e))?);
    }
    Ok(out)
}

pub fn read_embeddings(path: &Path, expected_h: Option<usize>) -> Result<Vec<EmbeddedText>> {
    parse_embeddings(open(path)?, &path.display().to_string(), expected_h)
}

pub fn embeddings_to_string(embedded: &[EmbeddedText]) -> String {
    let mut out = String::new();
    for e in embedded {
        let line = LineOut {
            text_id: &e.text_id,
            h: e.h,
            tokens: e
                .tokens
                .iter()
                .map(|t| TokenRec {
                    s: t.surface.clone(),
                    start: t.start,
                    end: t.end,
                })
                .collect(),
            rows: (0..e.n_tokens()).map(|i| e.row(i)).collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("embedding serializes"));
        out.push('\n');
    }
    out
}

pub fn write_embeddings(embedded: &[EmbeddedText], path: &Path) -> Result<()> {
    write_file(path, &embeddings_to_string(embedded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsr_core::scorer::{embed_test, ScorerConfig};
    use dsr_core::Text;

    fn config(h: usize) -> ScorerConfig {
        ScorerConfig {
            h,
            ..ScorerConfig::default()
        }
    }

    #[test]
    fn writer_output_reads_back_equal() {
        let e = embed_test(&Text::new("a", "they hurt the E.U. ."), &config(5)).unwrap();
        let s = embeddings_to_string(std::slice::from_ref(&e));
        let back = parse_embeddings(s.as_bytes(), "x", Some(5)).unwrap();
        assert_eq!(back, vec![e]);
    }

    #[test]
    fn width_mismatch_rejected() {
        let e = embed_test(&Text::new("a", "they"), &config(4)).unwrap();
        let s = embeddings_to_string(&[e]);
        assert!(parse_embeddings(s.as_bytes(), "x", Some(5)).is_err());
        let short = r#"{"text_id":"a","h":3,"tokens":[{"s":"x","start":0,"end":1}],"rows":[[0.1,0.2]]}"#;
        let err = parse_embeddings(short.as_bytes(), "x", None).unwrap_err();
        assert!(err.to_string().contains("width"), "{err}");
    }

    #[test]
    fn empty_text_rejected() {
        let empty = r#"{"text_id":"a","h":3,"tokens":[],"rows":[]}"#;
        assert!(parse_embeddings(empty.as_bytes(), "x", None).is_err());
    }

    #[test]
    fn overlapping_tokens_rejected() {
        let bad = r#"{"text_id":"a","h":1,"tokens":[{"s":"ab","start":0,"end":2},{"s":"bc","start":1,"end":3}],"rows":[[0.1],[0.2]]}"#;
        assert!(parse_embeddings(bad.as_bytes(), "x", None).is_err());
    }
}
