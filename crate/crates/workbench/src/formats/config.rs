use std::collections::BTreeMap;
use std::io::BufRead;
use std::num::NonZeroUsize;
use std::path::Path;
use std::str::FromStr;

use dsr_core::analytics::AnalyticsConfig;
use dsr_core::scorer::ScorerConfig;

use super::{line_error, open, FormatError, Result};

const KEYS: &[&str] = &[
    "h",
    "text_max",
    "span_max",
    "hidden",
    "lr",
    "beta1",
    "beta2",
    "eps",
    "epochs",
    "batch_size",
    "seed",
    "sigma",
    "min_target_count",
    "top_k_targets",
    "top_k_pairs",
    "haldane",
    "sd_threshold",
    "bins",
];

/// A flat `key = value` file. Blank lines and lines starting with `#` are
/// skipped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Parsed value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.entries
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| FormatError::Invalid(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn apply_scorer(&self, c: &mut ScorerConfig) -> Result<()> {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.get(stringify!($field))? {
                    c.$field = v;
                }
            )*};
        }
        set!(h, text_max, span_max, hidden, lr, beta1, beta2, eps, epochs, seed);
        if let Some(v) = self.entries.get("batch_size") {
            c.batch_size = parse_batch_size(v)?;
        }
        Ok(())
    }

    pub fn apply_analytics(&self, c: &mut AnalyticsConfig) -> Result<()> {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.get(stringify!($field))? {
                    c.$field = v;
                }
            )*};
        }
        set!(sigma, min_target_count, top_k_targets, top_k_pairs, haldane);
        Ok(())
    }
}

/// `full` (or `0`) means full-batch training.
pub fn parse_batch_size(v: &str) -> Result<Option<NonZeroUsize>> {
    if v == "full" {
        return Ok(None);
    }
    v.parse::<usize>()
        .map(NonZeroUsize::new)
        .map_err(|e| FormatError::Invalid(format!("config key `batch_size`: {e}")))
}

pub fn parse_config<R: BufRead>(input: R, source_name: &str) -> Result<ConfigFile> {
    let mut entries = BTreeMap::new();
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text).map_err(|source| FormatError::Io {
        path: source_name.to_string(),
        source,
    })?;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| line_error(source_name, i + 1, "expected `key = value`"))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(line_error(source_name, i + 1, format!("unknown key `{key}`")));
        }
        if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(line_error(source_name, i + 1, format!("key `{key}` set twice")));
        }
    }
    Ok(ConfigFile { entries })
}

pub fn read_config(path: &Path) -> Result<ConfigFile> {
    parse_config(open(path)?, &path.display().to_string())
}
