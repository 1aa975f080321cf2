//! Whitespace + punctuation tokenizer shared by the test embedder and the
//! token-level span metrics.
//!
//! A word is a run of alphanumerics (or `_`) that may contain single internal
//! connectors (`.`, `'`, `’`, `-`) between alphanumerics, so `E.U`, `don't`
//! and `3.14` stay whole. A word with an internal period also takes one
//! trailing period (`E.U.`, `U.S.`). Every other non-space character is a
//! token of its own.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Scalar-value offset, inclusive.
    pub start: usize,
    /// Scalar-value offset, exclusive.
    pub end: usize,
}

impl Token {
    pub fn new(surface: impl Into<String>, start: usize, end: usize) -> Self {
        Self {
            surface: surface.into(),
            start,
            end,
        }
    }

    pub fn intersects(&self, start: usize, end: usize) -> bool {
        self.start < end && start < self.end
    }
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_connector(c: char) -> bool {
    matches!(c, '.' | '\'' | '\u{2019}' | '-')
}

pub fn tokenize(content: &str) -> Vec<Token> {
    let chars: Vec<char> = content.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if is_word(c) {
            let mut dotted = false;
            i += 1;
            loop {
                while i < chars.len() && is_word(chars[i]) {
                    i += 1;
                }
                if i + 1 < chars.len() && is_connector(chars[i]) && is_word(chars[i + 1]) {
                    dotted |= chars[i] == '.';
                    i += 1;
                } else {
                    break;
                }
            }
            if dotted && i < chars.len() && chars[i] == '.' {
                i += 1;
            }
        } else {
            i += 1;
        }
        tokens.push(Token {
            surface: chars[start..i].iter().collect(),
            start,
            end: i,
        });
    }
    tokens
}

/// Indices of the tokens intersecting `start..end`.
pub fn covered_tokens(tokens: &[Token], start: usize, end: usize) -> impl Iterator<Item = usize> + '_ {
    tokens
        .iter()
        .enumerate()
        .filter(move |(_, t)| t.intersects(start, end))
        .map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn surfaces(s: &str) -> Vec<String> {
        tokenize(s).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn splits_words_and_punctuation() {
        assert_eq!(surfaces("they hurt children."), vec!["they", "hurt", "children", "."]);
        assert_eq!(surfaces("Hey, you!!"), vec!["Hey", ",", "you", "!", "!"]);
    }

    #[test]
    fn keeps_abbreviations_and_contractions() {
        assert_eq!(surfaces("all E.U. countries ."), vec!["all", "E.U.", "countries", "."]);
        assert_eq!(surfaces("don't stop-gap 3.14"), vec!["don't", "stop-gap", "3.14"]);
        assert_eq!(surfaces("end."), vec!["end", "."]);
        assert_eq!(surfaces("--x"), vec!["-", "-", "x"]);
    }

    #[test]
    fn offsets_are_scalar_indices() {
        let toks = tokenize("über  café");
        assert_eq!(toks[0], Token::new("über", 0, 4));
        assert_eq!(toks[1], Token::new("café", 6, 10));
        assert!(tokenize("   ").is_empty());
    }
}
