use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::CategoryLexicon;
use crate::error::{Error, Result};
use crate::stats::{welch_t, WelchResult};
use crate::types::{Corpus, SpanKind, Text};

/// Splits texts into High (at least 4/5 of raters positive) and Low (at least
/// 4/5 negative) for a document label. Texts in neither bin are dropped.
pub fn bin_high_low<'a>(texts: &'a [Text], label: &str) -> Result<(Vec<&'a Text>, Vec<&'a Text>)> {
    let mut high = Vec::new();
    let mut low = Vec::new();
    for t in texts {
        let tally = t.doc_labels.get(label).ok_or_else(|| Error::MissingLabel {
            text_id: t.id.clone(),
            label: label.to_string(),
        })?;
        if tally.total == 0 {
            return Err(Error::ZeroTotal {
                text_id: t.id.clone(),
                label: label.to_string(),
            });
        }
        let total = tally.total as u64;
        if 5 * tally.positive as u64 >= 4 * total {
            high.push(t);
        } else if 5 * tally.negative as u64 >= 4 * total {
            low.push(t);
        }
    }
    Ok((high, low))
}

/// Oppose–Advocate scores of High versus Low texts for one span group.
#[derive(Debug, Clone, PartialEq)]
pub struct BinComparison {
    /// `All` or a lexicon category name.
    pub group: String,
    pub n_high: usize,
    pub n_low: usize,
    /// `None` when the samples are too small or constant.
    pub test: Option<WelchResult>,
}

/// Welch tests of span Oppose–Advocate scores between the High and Low bins
/// of `label`: once over every scored span, then per referring-phrase
/// category over Character spans.
pub fn compare_bins(corpus: &Corpus, label: &str, lexicon: &CategoryLexicon) -> Result<Vec<BinComparison>> {
    let (high, low) = bin_high_low(corpus.texts(), label)?;
    let collect = |bin: &[&Text], group: Option<&str>| -> Vec<f64> {
        bin.iter()
            .flat_map(|t| corpus.spans_of(&t.id))
            .filter(|s| s.is_scored())
            .filter(|s| match group {
                None => true,
                Some(name) => {
                    s.span.kind == SpanKind::Character
                        && lexicon.categorize(&s.span.surface).is_some_and(|c| c.name == name)
                }
            })
            .map(|s| s.regard.oa())
            .collect()
    };
    let mut groups: Vec<Option<&str>> = Vec::new();
    groups.push(None);
    groups.extend(lexicon.categories().iter().map(|c| Some(c.name.as_str())));
    Ok(groups
        .into_iter()
        .map(|g| {
            let a = collect(&high, g);
            let b = collect(&low, g);
            BinComparison {
                group: g.unwrap_or("All").to_string(),
                n_high: a.len(),
                n_low: b.len(),
                test: welch_t(&a, &b).ok(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::RaterTally;
    use alloc::vec;

    fn text(id: &str, pos: u32, neg: u32, total: u32) -> Text {
        Text::new(id, "x").with_label("outrage", RaterTally::new(pos, neg, total).unwrap())
    }

    #[test]
    fn four_of_five_thresholds() {
        let texts = vec![text("h", 4, 1, 5), text("l", 1, 4, 5), text("n", 3, 2, 5)];
        let (high, low) = bin_high_low(&texts, "outrage").unwrap();
        assert_eq!(high.iter().map(|t| t.id.as_str()).collect::<Vec<_>>(), ["h"]);
        assert_eq!(low.iter().map(|t| t.id.as_str()).collect::<Vec<_>>(), ["l"]);
    }

    #[test]
    fn zero_total_and_missing_label() {
        assert!(matches!(bin_high_low(&[text("z", 0, 0, 0)], "outrage"), Err(Error::ZeroTotal { .. })));
        assert!(matches!(bin_high_low(&[Text::new("m", "x")], "outrage"), Err(Error::MissingLabel { .. })));
    }
}
