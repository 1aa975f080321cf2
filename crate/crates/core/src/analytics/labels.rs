use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::types::{Corpus, RegardVector, SpanKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegardLabel {
    Opposed,
    Advocated,
    Victimized,
    Aided,
    Harmful,
    Helpful,
}

impl RegardLabel {
    pub const ALL: [RegardLabel; 6] = [
        RegardLabel::Opposed,
        RegardLabel::Advocated,
        RegardLabel::Victimized,
        RegardLabel::Aided,
        RegardLabel::Harmful,
        RegardLabel::Helpful,
    ];

    fn bit(self) -> u8 {
        1 << self as u8
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegardLabel::Opposed => "Opposed",
            RegardLabel::Advocated => "Advocated",
            RegardLabel::Victimized => "Victimized",
            RegardLabel::Aided => "Aided",
            RegardLabel::Harmful => "Harmful",
            RegardLabel::Helpful => "Helpful",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for RegardLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Small set of [`RegardLabel`]s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct LabelSet(u8);

impl LabelSet {
    pub fn insert(&mut self, label: RegardLabel) {
        self.0 |= label.bit();
    }

    pub fn contains(&self, label: RegardLabel) -> bool {
        self.0 & label.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = RegardLabel> + '_ {
        RegardLabel::ALL.into_iter().filter(|l| self.contains(*l))
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.0 & !other.0 == 0
    }
}

impl FromIterator<RegardLabel> for LabelSet {
    fn from_iter<I: IntoIterator<Item = RegardLabel>>(iter: I) -> Self {
        let mut set = LabelSet::default();
        for l in iter {
            set.insert(l);
        }
        set
    }
}

/// Categorical labels of a regard vector: the negative pole when a score is
/// `<= -sigma`, the positive pole when `>= sigma`. Masked dimensions yield
/// nothing.
pub fn threshold_labels(regard: &RegardVector, sigma: f64) -> LabelSet {
    const POLES: [(RegardLabel, RegardLabel); 3] = [
        (RegardLabel::Opposed, RegardLabel::Advocated),
        (RegardLabel::Victimized, RegardLabel::Aided),
        (RegardLabel::Harmful, RegardLabel::Helpful),
    ];
    let mut set = LabelSet::default();
    let scores = regard.scores();
    let mask = regard.mask();
    for k in 0..3 {
        if !mask[k] {
            continue;
        }
        if scores[k] <= -sigma {
            set.insert(POLES[k].0);
        }
        if scores[k] >= sigma {
            set.insert(POLES[k].1);
        }
    }
    set
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSpan {
    pub surface: String,
    pub kind: SpanKind,
    pub labels: LabelSet,
}

/// Labels every scored span of a corpus.
pub fn label_spans(corpus: &Corpus, sigma: f64) -> Vec<LabeledSpan> {
    corpus
        .spans()
        .iter()
        .filter(|s| s.is_scored())
        .map(|s| LabeledSpan {
            surface: s.span.surface.clone(),
            kind: s.span.kind,
            labels: threshold_labels(&s.regard, sigma),
        })
        .collect()
}
