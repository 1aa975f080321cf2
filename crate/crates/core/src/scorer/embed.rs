use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ScorerConfig;
use crate::error::{Error, Result};
use crate::hash::{fnv1a64, SplitMix64};
use crate::tokenize::{tokenize, Token};
use crate::types::Text;

/// Tokens of one text and their `n_tokens x h` embedding matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedText {
    pub text_id: String,
    pub tokens: Vec<Token>,
    pub h: usize,
    matrix: Vec<f64>,
}

impl EmbeddedText {
    pub fn new(text_id: impl Into<String>, tokens: Vec<Token>, h: usize, matrix: Vec<f64>) -> Result<Self> {
        let text_id = text_id.into();
        let layout = |reason: String| Error::TokenLayout {
            text_id: text_id.clone(),
            reason,
        };
        if tokens.is_empty() {
            return Err(Error::EmptyText(text_id));
        }
        if h == 0 {
            return Err(layout("zero embedding width".into()));
        }
        if matrix.len() != tokens.len() * h {
            return Err(Error::Shape(format!(
                "text `{text_id}`: {} values for {} tokens of width {h}",
                matrix.len(),
                tokens.len()
            )));
        }
        let mut prev_end = 0;
        for (i, t) in tokens.iter().enumerate() {
            if t.start >= t.end {
                return Err(layout(format!("token {i} is empty")));
            }
            if t.start < prev_end {
                return Err(layout(format!("token {i} starts before the previous token ends")));
            }
            if t.surface.chars().count() != t.end - t.start {
                return Err(layout(format!("token {i} surface length disagrees with its offsets")));
            }
            prev_end = t.end;
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding matrix"));
        }
        Ok(Self {
            text_id,
            tokens,
            h,
            matrix,
        })
    }

    pub fn n_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.h..(i + 1) * self.h]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Checks that the tokens tile `text`: surfaces match the content and
    /// everything between tokens is whitespace.
    pub fn validate_against(&self, text: &Text) -> Result<()> {
        let layout = |reason: String| Error::TokenLayout {
            text_id: self.text_id.clone(),
            reason,
        };
        if text.id != self.text_id {
            return Err(layout(format!("embedded text id differs from `{}`", text.id)));
        }
        let chars: Vec<char> = text.content.chars().collect();
        let mut pos = 0;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.end > chars.len() {
                return Err(layout(format!("token {i} ends past the text")));
            }
            if chars[pos..t.start].iter().any(|c| !c.is_whitespace()) {
                return Err(layout(format!("gap before token {i} holds non-space characters")));
            }
            if chars[t.start..t.end].iter().copied().ne(t.surface.chars()) {
                return Err(layout(format!("token {i} surface does not match the text")));
            }
            pos = t.end;
        }
        if chars[pos..].iter().any(|c| !c.is_whitespace()) {
            return Err(layout("text continues after the last token".into()));
        }
        Ok(())
    }
}

/// Raw, context-free row of a token: splitmix64 seeded with the FNV-1a hash
/// of its UTF-8 bytes, each draw mapped to [-1, 1).
pub fn raw_token_row(surface: &str, h: usize) -> Vec<f64> {
    let mut rng = SplitMix64::new(fnv1a64(surface.as_bytes()));
    (0..h).map(|_| 2.0 * rng.next_unit() - 1.0).collect()
}

/// Replaces each row with the mean of itself and its immediate neighbours.
pub fn contextualize(raw: &[f64], n: usize, h: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; n * h];
    for i in 0..n {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        let width = (hi - lo + 1) as f64;
        let row = &mut out[i * h..(i + 1) * h];
        for k in lo..=hi {
            for (acc, v) in row.iter_mut().zip(&raw[k * h..(k + 1) * h]) {
                *acc += v;
            }
        }
        for v in row.iter_mut() {
            *v /= width;
        }
    }
    out
}

/// Deterministic stand-in for a transformer encoder.
pub fn embed_test(text: &Text, config: &ScorerConfig) -> Result<EmbeddedText> {
    let tokens = tokenize(&text.content);
    if tokens.is_empty() {
        return Err(Error::EmptyText(text.id.clone()));
    }
    if tokens.len() > config.text_max {
        return Err(Error::Truncation {
            text_id: text.id.clone(),
            tokens: tokens.len(),
            max: config.text_max,
        });
    }
    let h = config.h;
    let mut raw = Vec::with_capacity(tokens.len() * h);
    for t in &tokens {
        raw.extend(raw_token_row(&t.surface, h));
    }
    let matrix = contextualize(&raw, tokens.len(), h);
    EmbeddedText::new(text.id.clone(), tokens, h, matrix)
}
