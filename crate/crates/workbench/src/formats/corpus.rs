use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use dsr_core::{Corpus, Provenance, RaterTally, RegardVector, ScoredSpan, Span, SpanKind, Text};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{jsonl_lines, line_error, name_of, open, score_value, write_file, FormatError, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TallyIn {
    pos: u32,
    neg: u32,
    total: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoresIn {
    oa: f64,
    #[serde(default)]
    va: f64,
    #[serde(default)]
    hh: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpanIn {
    start: usize,
    end: usize,
    kind: String,
    scores: Option<ScoresIn>,
    mask: Option<[bool; 3]>,
    provenance: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineIn {
    id: String,
    content: String,
    #[serde(default)]
    source: String,
    #[serde(default)]
    doc_labels: BTreeMap<String, TallyIn>,
    #[serde(default)]
    spans: Vec<SpanIn>,
}

#[derive(Serialize)]
struct TallyOut {
    pos: u32,
    neg: u32,
    total: u32,
}

#[derive(Serialize)]
struct ScoresOut {
    oa: Box<RawValue>,
    va: Box<RawValue>,
    hh: Box<RawValue>,
}

#[derive(Serialize)]
struct SpanOut<'a> {
    start: usize,
    end: usize,
    kind: &'a str,
    scores: ScoresOut,
    mask: [bool; 3],
    provenance: &'a str,
}

#[derive(Serialize)]
struct LineOut<'a> {
    id: &'a str,
    content: &'a str,
    source: &'a str,
    doc_labels: BTreeMap<&'a str, TallyOut>,
    spans: Vec<SpanOut<'a>>,
}

fn to_span(text: &Text, s: SpanIn) -> std::result::Result<ScoredSpan, String> {
    let kind = SpanKind::parse(&s.kind).ok_or_else(|| format!("unknown span kind `{}`", s.kind))?;
    let span = Span::new(text, s.start, s.end, kind).map_err(|e| e.to_string())?;
    if let Some(mask) = s.mask {
        if mask != kind.mask() {
            return Err(format!("mask {mask:?} does not match a {kind} span"));
        }
    }
    let provenance = match &s.provenance {
        Some(p) => Provenance::parse(p).ok_or_else(|| format!("unknown provenance `{p}`"))?,
        None if s.scores.is_some() => Provenance::HumanAggregate,
        None => Provenance::Unscored,
    };
    if provenance == Provenance::Unscored {
        return Ok(ScoredSpan::unscored(span));
    }
    let sc = s
        .scores
        .ok_or_else(|| format!("{} span without scores", provenance.as_str()))?;
    let regard = RegardVector::for_kind(kind, sc.oa, sc.va, sc.hh).map_err(|e| e.to_string())?;
    ScoredSpan::new(span, regard, provenance).map_err(|e| e.to_string())
}

/// Parses corpus JSONL. `name` becomes the corpus name.
pub fn parse_corpus<R: BufRead>(input: R, name: &str) -> Result<Corpus> {
    let mut texts = Vec::new();
    let mut spans = Vec::new();
    let mut seen = BTreeSet::new();
    for item in jsonl_lines(input, name) {
        let (line, raw) = item?;
        let rec: LineIn = serde_json::from_str(&raw).map_err(|e| line_error(name, line, e))?;
        if !seen.insert(rec.id.clone()) {
            return Err(line_error(name, line, format!("duplicate text id `{}`", rec.id)));
        }
        let mut text = Text::new(rec.id, rec.content).with_source(rec.source);
        for (label, t) in rec.doc_labels {
            let tally = RaterTally::new(t.pos, t.neg, t.total).map_err(|e| line_error(name, line, e))?;
            text = text.with_label(label, tally);
        }
        text.validate(dsr_core::types::DEFAULT_MAX_TEXT_CHARS)
            .map_err(|e| line_error(name, line, e))?;
        for s in rec.spans {
            spans.push(to_span(&text, s).map_err(|e| line_error(name, line, e))?);
        }
        texts.push(text);
    }
    Ok(Corpus::new(name, texts, spans)?)
}

pub fn read_corpus(path: &Path) -> Result<Corpus> {
    let name = name_of(path);
    parse_corpus(open(path)?, &name).map_err(|e| match e {
        FormatError::Line { line, message, .. } => FormatError::Line {
            source_name: path.display().to_string(),
            line,
            message,
        },
        other => other,
    })
}

/// Serializes a corpus, one text per line with its spans in corpus order.
pub fn corpus_to_string(corpus: &Corpus) -> String {
    let mut out = String::new();
    for (text, spans) in corpus.spans_by_text() {
        let line = LineOut {
            id: &text.id,
            content: &text.content,
            source: &text.source,
            doc_labels: text
                .doc_labels
                .iter()
                .map(|(k, t)| {
                    (
                        k.as_str(),
                        TallyOut {
                            pos: t.positive,
                            neg: t.negative,
                            total: t.total,
                        },
                    )
                })
                .collect(),
            spans: spans
                .iter()
                .map(|s| {
                    let [oa, va, hh] = s.regard.scores();
                    SpanOut {
                        start: s.span.start,
                        end: s.span.end,
                        kind: s.span.kind.as_str(),
                        scores: ScoresOut {
                            oa: score_value(oa),
                            va: score_value(va),
                            hh: score_value(hh),
                        },
                        mask: s.regard.mask(),
                        provenance: s.provenance.as_str(),
                    }
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("corpus line serializes"));
        out.push('\n');
    }
    out
}

pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    write_file(path, &corpus_to_string(corpus))
}
