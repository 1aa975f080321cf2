use std::io::BufRead;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use dsr_core::agreement::AnnotationEvent;
use dsr_core::{Dimension, SpanKind};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{jsonl_lines, line_error, open, score_value, write_file, Result};

/// One line of `annotations.jsonl`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub annotator: String,
    pub text_id: String,
    pub start: usize,
    pub end: usize,
    pub kind: String,
    pub dim: String,
    pub score: f64,
    pub ts: String,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    annotator: &'a str,
    text_id: &'a str,
    start: usize,
    end: usize,
    kind: &'a str,
    dim: &'a str,
    score: Box<RawValue>,
    ts: String,
}

impl AnnotationRecord {
    pub fn into_event(self) -> std::result::Result<AnnotationEvent, String> {
        let kind = SpanKind::parse(&self.kind).ok_or_else(|| format!("unknown span kind `{}`", self.kind))?;
        let dimension = Dimension::parse(&self.dim).ok_or_else(|| format!("unknown dimension `{}`", self.dim))?;
        let ts = DateTime::parse_from_rfc3339(&self.ts).map_err(|e| format!("timestamp `{}`: {e}", self.ts))?;
        let event = AnnotationEvent {
            annotator_id: self.annotator,
            text_id: self.text_id,
            start: self.start,
            end: self.end,
            kind,
            dimension,
            score: self.score,
            timestamp_ms: ts.timestamp_millis(),
        };
        event.validate().map_err(|e| e.to_string())?;
        Ok(event)
    }
}

pub(crate) fn format_timestamp(ms: i64) -> String {
    DateTime::<Utc>::from_timestamp_millis(ms)
        .unwrap_or_default()
        .to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// One JSON line (with trailing newline) for an event.
pub(crate) fn event_line(e: &AnnotationEvent) -> String {
    let rec = RecordOut {
        annotator: &e.annotator_id,
        text_id: &e.text_id,
        start: e.start,
        end: e.end,
        kind: e.kind.as_str(),
        dim: e.dimension.code(),
        score: score_value(e.score),
        ts: format_timestamp(e.timestamp_ms),
    };
    let mut s = serde_json::to_string(&rec).expect("annotation serializes");
    s.push('\n');
    s
}

pub fn parse_annotations<R: BufRead>(input: R, source_name: &str) -> Result<Vec<AnnotationEvent>> {
    let mut out = Vec::new();
    for item in jsonl_lines(input, source_name) {
        let (line, raw) = item?;
        let rec: AnnotationRecord = serde_json::from_str(&raw).map_err(|e| line_error(source_name, line, e))?;
        out.push(rec.into_event().map_err(|e| line_error(source_name, line, e))?);
    }
    Ok(out)
}

pub fn read_annotations(path: &Path) -> Result<Vec<AnnotationEvent>> {
    parse_annotations(open(path)?, &path.display().to_string())
}

pub fn annotations_to_string(events: &[AnnotationEvent]) -> String {
    events.iter().map(event_line).collect()
}

pub fn write_annotations(events: &[AnnotationEvent], path: &Path) -> Result<()> {
    write_file(path, &annotations_to_string(events))
}
