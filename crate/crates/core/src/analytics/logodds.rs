use alloc::string::String;

use super::{CategoryLexicon, LabeledSpan, RegardLabel};
use crate::error::{Error, Result};
use crate::stats::{fisher_exact, ContingencyTable};

/// Which spans count as "having the attribute".
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttributePredicate {
    Label(RegardLabel),
    /// Both labels on the same span.
    Joint(RegardLabel, RegardLabel),
    /// The label, among spans of the category only.
    Conditional { label: RegardLabel, category: String },
}

impl AttributePredicate {
    fn holds(&self, span: &LabeledSpan) -> bool {
        match self {
            AttributePredicate::Label(l) => span.labels.contains(*l),
            AttributePredicate::Joint(a, b) => span.labels.contains(*a) && span.labels.contains(*b),
            AttributePredicate::Conditional { label, .. } => span.labels.contains(*label),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogOdds {
    /// Uncorrected counts; `p` comes from this table.
    pub table: ContingencyTable,
    /// Odds ratio, Haldane-corrected when `corrected`.
    pub odds_ratio: f64,
    pub log_odds: f64,
    pub p: f64,
    pub corrected: bool,
}

/// Log odds that a span in `spans_in` has the attribute, relative to
/// `spans_out`, with Fisher's exact p-value.
///
/// Conditional predicates first restrict both populations to members of the
/// category. When a whole column of the table is empty only one table has
/// those margins, so `p` is 1.
pub fn attribute_log_odds(
    spans_in: &[LabeledSpan],
    spans_out: &[LabeledSpan],
    predicate: &AttributePredicate,
    lexicon: &CategoryLexicon,
    haldane: bool,
) -> Result<LogOdds> {
    if spans_in.is_empty() || spans_out.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let category = match predicate {
        AttributePredicate::Conditional { category, .. } => Some(
            lexicon
                .get(category)
                .ok_or_else(|| Error::UnknownCategory(category.clone()))?,
        ),
        _ => None,
    };
    let member = |s: &LabeledSpan| {
        category.is_none_or(|cat| lexicon.categorize(&s.surface).is_some_and(|c| c.name == cat.name))
    };
    let tally = |spans: &[LabeledSpan]| {
        let mut has = 0u64;
        let mut lacks = 0u64;
        for s in spans.iter().filter(|s| member(s)) {
            if predicate.holds(s) {
                has += 1;
            } else {
                lacks += 1;
            }
        }
        (has, lacks)
    };
    let (a, b) = tally(spans_in);
    let (c, d) = tally(spans_out);
    if a + b == 0 || c + d == 0 {
        return match predicate {
            AttributePredicate::Conditional { category, .. } => Err(Error::EmptyCategory(category.clone())),
            _ => Err(Error::EmptyPopulation),
        };
    }
    let table = ContingencyTable::new(a, b, c, d);
    let corrected = haldane && table.has_zero_cell();
    let odds_ratio = if corrected {
        table.haldane_odds_ratio()
    } else {
        table.odds_ratio()
    };
    let p = if a + c == 0 || b + d == 0 {
        1.0
    } else {
        fisher_exact(table)?.p_two_sided
    };
    Ok(LogOdds {
        table,
        odds_ratio,
        log_odds: libm::log(odds_ratio),
        p,
        corrected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::LabelSet;
    use crate::types::SpanKind;
    use alloc::vec::Vec;
    use RegardLabel::*;

    fn spans(n_with: usize, n: usize, label: RegardLabel, surface: &str) -> Vec<LabeledSpan> {
        (0..n)
            .map(|i| LabeledSpan {
                surface: surface.into(),
                kind: SpanKind::Character,
                labels: if i < n_with { [label].into_iter().collect() } else { LabelSet::default() },
            })
            .collect()
    }

    #[test]
    fn equal_proportions_give_zero() {
        let lex = CategoryLexicon::default();
        let r = attribute_log_odds(&spans(20, 100, Opposed, "x"), &spans(10, 50, Opposed, "x"), &AttributePredicate::Label(Opposed), &lex, true).unwrap();
        assert_eq!(r.log_odds, 0.0);
        assert!(!r.corrected);
    }

    #[test]
    fn thirty_versus_ten_percent() {
        let lex = CategoryLexicon::default();
        let r = attribute_log_odds(&spans(30, 100, Opposed, "x"), &spans(10, 100, Opposed, "x"), &AttributePredicate::Label(Opposed), &lex, true).unwrap();
        assert_eq!(r.table, ContingencyTable::new(30, 70, 10, 90));
        assert!((r.log_odds - libm::log((30.0 * 90.0) / (70.0 * 10.0))).abs() < 1e-14);
        assert!(r.p < 0.001);
    }

    #[test]
    fn zero_cell_stays_finite_with_haldane() {
        let lex = CategoryLexicon::default();
        let pred = AttributePredicate::Label(Harmful);
        let r = attribute_log_odds(&spans(5, 10, Harmful, "x"), &spans(0, 10, Harmful, "x"), &pred, &lex, true).unwrap();
        assert!(r.log_odds.is_finite() && r.corrected);
        assert!((r.odds_ratio - (5.5 * 10.5) / (5.5 * 0.5)).abs() < 1e-12);
        let raw = attribute_log_odds(&spans(5, 10, Harmful, "x"), &spans(0, 10, Harmful, "x"), &pred, &lex, false).unwrap();
        assert_eq!(raw.log_odds, f64::INFINITY);
        assert_eq!(raw.p, r.p);
    }

    #[test]
    fn swapping_populations_flips_sign() {
        let lex = CategoryLexicon::default();
        let pred = AttributePredicate::Label(Aided);
        let a = spans(7, 30, Aided, "x");
        let b = spans(3, 40, Aided, "x");
        let fwd = attribute_log_odds(&a, &b, &pred, &lex, true).unwrap();
        let rev = attribute_log_odds(&b, &a, &pred, &lex, true).unwrap();
        assert!((fwd.log_odds + rev.log_odds).abs() < 1e-14);
        assert!((fwd.p - rev.p).abs() < 1e-14);
    }

    #[test]
    fn joint_and_conditional() {
        let lex = CategoryLexicon::default();
        let mk = |surface: &str, labels: &[RegardLabel]| LabeledSpan {
            surface: surface.into(),
            kind: SpanKind::Character,
            labels: labels.iter().copied().collect(),
        };
        let inside = [mk("you", &[Victimized, Opposed]), mk("you", &[]), mk("cop", &[Victimized]), mk("him", &[Victimized, Opposed])];
        let outside = [mk("your", &[]), mk("you", &[Victimized]), mk("her", &[Victimized, Opposed])];
        let joint = attribute_log_odds(&inside, &outside, &AttributePredicate::Joint(Victimized, Opposed), &lex, false).unwrap();
        assert_eq!(joint.table, ContingencyTable::new(2, 2, 1, 2));
        let cond = AttributePredicate::Conditional { label: Victimized, category: "2nd-Person".into() };
        let r = attribute_log_odds(&inside, &outside, &cond, &lex, false).unwrap();
        assert_eq!(r.table, ContingencyTable::new(1, 1, 1, 1));
        let missing = AttributePredicate::Conditional { label: Victimized, category: "3rd-Person-Female".into() };
        assert!(matches!(attribute_log_odds(&inside, &outside, &missing, &lex, true), Err(Error::EmptyCategory(_))));
        let unknown = AttributePredicate::Conditional { label: Victimized, category: "robots".into() };
        assert!(matches!(attribute_log_odds(&inside, &outside, &unknown, &lex, true), Err(Error::UnknownCategory(_))));
    }

    #[test]
    fn absent_attribute_everywhere() {
        let lex = CategoryLexicon::default();
        let r = attribute_log_odds(&spans(0, 5, Helpful, "x"), &spans(0, 6, Helpful, "x"), &AttributePredicate::Label(Helpful), &lex, true).unwrap();
        assert_eq!(r.p, 1.0);
        assert!(r.log_odds.is_finite());
    }
}
