use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub name: String,
    /// Short name used for graph nodes, e.g. `me/us`.
    pub display: String,
    pub lemmas: BTreeSet<String>,
}

/// Referring-phrase categories for Character spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryLexicon {
    categories: Vec<Category>,
}

const DEFAULT_TABLE: [(&str, &str, &[&str]); 5] = [
    (
        "1st-Person",
        "me/us",
        &["i", "me", "my", "mine", "myself", "ourself", "ourselves", "our", "ours", "we", "us"],
    ),
    ("2nd-Person", "you", &["you", "your", "yours", "yourself", "yourselves", "u", "ur"]),
    (
        "3rd-Person-Female",
        "her",
        &["she", "her", "hers", "herself", "female", "woman", "girl", "lady"],
    ),
    (
        "3rd-Person-Male",
        "him",
        &["he", "him", "his", "himself", "man", "boy", "guy", "male"],
    ),
    (
        "3rd-Person-Misc",
        "them",
        &["they", "them", "their", "theirs", "themselves", "themself", "those"],
    ),
];

impl Default for CategoryLexicon {
    fn default() -> Self {
        let categories = DEFAULT_TABLE
            .iter()
            .map(|(name, display, lemmas)| Category {
                name: name.to_string(),
                display: display.to_string(),
                lemmas: lemmas.iter().map(|l| l.to_string()).collect(),
            })
            .collect();
        Self { categories }
    }
}

impl CategoryLexicon {
    /// Lemmas must be lowercase and no lemma may belong to two categories.
    pub fn new(categories: Vec<Category>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut names = BTreeSet::new();
        for c in &categories {
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidConfig(format!("category `{}` listed twice", c.name)));
            }
            for l in &c.lemmas {
                if l.to_lowercase() != *l {
                    return Err(Error::InvalidConfig(format!("lemma `{l}` is not lowercase")));
                }
                if !seen.insert(l.as_str()) {
                    return Err(Error::InvalidConfig(format!("lemma `{l}` is in more than one category")));
                }
            }
        }
        Ok(Self { categories })
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn get(&self, name: &str) -> Option<&Category> {
        self.categories.iter().find(|c| c.name == name)
    }

    /// Category of a span surface: lowercased, outer punctuation stripped,
    /// exact lemma match. Multi-word surfaces never match.
    pub fn categorize(&self, surface: &str) -> Option<&Category> {
        let cleaned = surface
            .trim_matches(|c: char| c.is_whitespace() || (!c.is_alphanumeric() && c != '_'))
            .to_lowercase();
        if cleaned.is_empty() || cleaned.contains(char::is_whitespace) {
            return None;
        }
        self.categories.iter().find(|c| c.lemmas.contains(&cleaned))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn name(lex: &CategoryLexicon, s: &str) -> Option<String> {
        lex.categorize(s).map(|c| c.name.clone())
    }

    #[test]
    fn default_table_lookups() {
        let lex = CategoryLexicon::default();
        assert_eq!(name(&lex, "Ourselves").as_deref(), Some("1st-Person"));
        assert_eq!(name(&lex, "u").as_deref(), Some("2nd-Person"));
        assert_eq!(name(&lex, "restaurant"), None);
        assert_eq!(name(&lex, "\"Them!\"").as_deref(), Some("3rd-Person-Misc"));
        assert_eq!(name(&lex, "I").as_deref(), Some("1st-Person"));
        assert_eq!(name(&lex, "that man"), None);
        assert_eq!(lex.categorize("me").unwrap().display, "me/us");
    }

    #[test]
    fn default_table_is_valid() {
        let lex = CategoryLexicon::default();
        assert_eq!(CategoryLexicon::new(lex.categories().to_vec()).unwrap(), lex);
        assert_eq!(lex.categories().len(), 5);
    }

    #[test]
    fn overlapping_or_uppercase_lemmas_rejected() {
        let cat = |n: &str, l: &[&str]| Category {
            name: n.into(),
            display: n.into(),
            lemmas: l.iter().map(|s| s.to_string()).collect(),
        };
        assert!(CategoryLexicon::new(alloc::vec![cat("a", &["x"]), cat("b", &["x"])]).is_err());
        assert!(CategoryLexicon::new(alloc::vec![cat("a", &["X"])]).is_err());
    }
}
