//! Readers and writers for the on-disk formats.
//!
//! Every JSONL reader reports failures with the 1-based line number of the
//! offending record.

mod annotations;
mod checkpoint;
mod config;
mod corpus;
mod embeddings;
mod lexicon;
mod predictions;

pub use annotations::{annotations_to_string, parse_annotations, read_annotations, write_annotations, AnnotationRecord};
pub(crate) use annotations::event_line;
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use config::{parse_batch_size, parse_config, read_config, ConfigFile};
pub use corpus::{corpus_to_string, parse_corpus, read_corpus, write_corpus};
pub use embeddings::{embeddings_to_string, parse_embeddings, read_embeddings, write_embeddings};
pub use lexicon::{parse_lexicon, read_lexicon, read_word_list};
pub use predictions::{parse_predictions, read_predictions};

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde_json::value::RawValue;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{source_name}:{line}: {message}")]
    Line {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] dsr_core::Error),
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = File::create(path).map_err(io_err)?;
    f.write_all(contents.as_bytes()).map_err(io_err)?;
    f.sync_all().map_err(io_err)
}

pub(crate) fn name_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Yields `(line_number, line)` for each non-blank line.
pub(crate) fn jsonl_lines<'a, R: BufRead + 'a>(
    input: R,
    source_name: &'a str,
) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    input
        .lines()
        .enumerate()
        .filter_map(move |(i, line)| match line {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Ok((i + 1, l))),
            Err(source) => Some(Err(FormatError::Io {
                path: source_name.to_string(),
                source,
            })),
        })
}

pub(crate) fn line_error(source_name: &str, line: usize, message: impl ToString) -> FormatError {
    FormatError::Line {
        source_name: source_name.to_string(),
        line,
        message: message.to_string(),
    }
}

/// Decimal text for a score with at least six significant digits. The
/// shortest round-trip form is kept and zero-padded when it is shorter.
pub fn format_score(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') {
        s.push('.');
    }
    let digits = s.trim_start_matches('-').chars().filter(char::is_ascii_digit);
    let significant = digits.skip_while(|c| *c == '0').count();
    for _ in significant..6 {
        s.push('0');
    }
    s
}

pub(crate) fn score_value(v: f64) -> Box<RawValue> {
    RawValue::from_string(format_score(v)).expect("formatted score is a JSON number")
}

#[cfg(test)]
mod tests {
    use super::format_score;

    #[test]
    fn scores_keep_six_significant_digits() {
        assert_eq!(format_score(0.5), "0.500000");
        assert_eq!(format_score(-1.0), "-1.00000");
        assert_eq!(format_score(0.0), "0.000000");
        assert_eq!(format_score(-0.57), "-0.570000");
        assert_eq!(format_score(0.123456789), "0.123456789");
        assert_eq!(format_score(0.1 + 0.2), "0.30000000000000004");
        for v in [0.5, -1.0, 1e-7, -0.333333333333, 0.1 + 0.2] {
            assert_eq!(format_score(v).parse::<f64>().unwrap(), v);
        }
    }
}
