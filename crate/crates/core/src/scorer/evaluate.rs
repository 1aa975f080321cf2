use alloc::vec::Vec;

use super::{ScoringHead, TrainingBatch};
use crate::error::{Error, Result};
use crate::types::Dimension;

/// Fit statistics for one dimension over its labelled entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreFit {
    pub n: usize,
    pub rmse: f64,
    /// `None` when the targets have zero variance.
    pub r2: Option<f64>,
}

/// RMSE and R² per dimension. A dimension with no labelled entries yields
/// `None`.
pub fn evaluate_scores(head: &ScoringHead, data: &TrainingBatch) -> Result<[Option<ScoreFit>; 3]> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let preds = head.forward(data.pooled())?;
    Ok(fit_per_dimension(&preds, data.targets(), data.masks()))
}

pub(crate) fn fit_per_dimension(preds: &[[f64; 3]], targets: &[[f64; 3]], masks: &[[bool; 3]]) -> [Option<ScoreFit>; 3] {
    let mut out = [None; 3];
    for dim in Dimension::ALL {
        let k = dim.index();
        let pairs: Vec<(f64, f64)> = preds
            .iter()
            .zip(targets)
            .zip(masks)
            .filter(|(_, m)| m[k])
            .map(|((p, y), _)| (p[k], y[k]))
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let n = pairs.len() as f64;
        let ss_res: f64 = pairs.iter().map(|(p, y)| (y - p) * (y - p)).sum();
        let mean = pairs.iter().map(|(_, y)| y).sum::<f64>() / n;
        let ss_tot: f64 = pairs.iter().map(|(_, y)| (y - mean) * (y - mean)).sum();
        out[k] = Some(ScoreFit {
            n: pairs.len(),
            rmse: libm::sqrt(ss_res / n),
            r2: (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot),
        });
    }
    out
}
