use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Equal-width bins over [-1, 1]; `edges` has `counts.len() + 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Histogram of scores in [-1, 1]. The last bin is closed on the right so
/// that 1.0 is counted.
pub fn histogram(scores: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidConfig("histogram needs at least one bin".into()));
    }
    if scores.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let width = 2.0 / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { 1.0 } else { -1.0 + i as f64 * width }).collect();
    let mut counts = vec![0usize; bins];
    for &s in scores {
        if !(-1.0..=1.0).contains(&s) {
            return Err(Error::ScoreOutOfRange(s));
        }
        let mut i = ((s + 1.0) / width) as usize;
        i = i.min(bins - 1);
        // guard against rounding at interior edges
        while i > 0 && s < edges[i] {
            i -= 1;
        }
        while i + 1 < bins && s >= edges[i + 1] {
            i += 1;
        }
        counts[i] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_closed_interval() {
        let h = histogram(&[-1.0, -0.5, 0.0, 0.49, 1.0], 4).unwrap();
        assert_eq!(h.edges, [-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(h.counts, [1, 1, 2, 1]);
        assert_eq!(h.counts.iter().sum::<usize>(), 5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(histogram(&[1.5], 4).is_err());
        assert!(histogram(&[], 4).is_err());
        assert!(histogram(&[0.0], 0).is_err());
    }
}
