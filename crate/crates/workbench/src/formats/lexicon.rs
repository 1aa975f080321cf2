use std::collections::BTreeMap;
use std::io::{BufRead, Read};
use std::path::Path;

use dsr_core::analytics::{Category, CategoryLexicon};

use super::{open, FormatError, Result};

/// Parses a lexicon override: a JSON object mapping category names to lemma
/// arrays. A category named like a built-in one (by name or display name)
/// keeps the built-in display name; any other category is displayed by its
/// name. Lemmas are lowercased.
pub fn parse_lexicon(json: &str) -> Result<CategoryLexicon> {
    let raw: BTreeMap<String, Vec<String>> =
        serde_json::from_str(json).map_err(|e| FormatError::Invalid(format!("lexicon: {e}")))?;
    let builtin = CategoryLexicon::default();
    let categories = raw
        .into_iter()
        .map(|(name, lemmas)| {
            let known = builtin.categories().iter().find(|c| c.name == name || c.display == name);
            Category {
                display: known.map_or_else(|| name.clone(), |c| c.display.clone()),
                name: known.map_or(name, |c| c.name.clone()),
                lemmas: lemmas.iter().map(|l| l.trim().to_lowercase()).collect(),
            }
        })
        .collect();
    Ok(CategoryLexicon::new(categories)?)
}

pub fn read_lexicon(path: &Path) -> Result<CategoryLexicon> {
    let mut s = String::new();
    open(path)?.read_to_string(&mut s).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_lexicon(&s)
}

/// One entry per line; blank lines and `#` comments are skipped.
pub fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in open(path)?.lines() {
        let line = line.map_err(|source| FormatError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let entry = line.trim();
        if !entry.is_empty() && !entry.starts_with('#') {
            out.push(entry.to_string());
        }
    }
    Ok(out)
}
