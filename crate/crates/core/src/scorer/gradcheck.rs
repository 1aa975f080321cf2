use super::{ScoringHead, TrainingBatch};
use crate::error::{Error, Result};

/// Largest relative disagreement between the analytic gradient and central
/// finite differences, over every parameter of `head`:
/// `|g_a - g_n| / max(|g_a|, |g_n|, 1e-8)`.
pub fn grad_check(head: &ScoringHead, batch: &TrainingBatch, epsilon: f64) -> Result<f64> {
    grad_check_with(head, batch, epsilon, |g| g)
}

/// As [`grad_check`], with the analytic gradient passed through `distort`
/// first. Used to confirm the checker notices a wrong gradient.
pub fn grad_check_with(
    head: &ScoringHead,
    batch: &TrainingBatch,
    epsilon: f64,
    distort: impl Fn(f64) -> f64,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1e-2) {
        return Err(Error::InvalidConfig("epsilon must lie in (0, 1e-2]".into()));
    }
    let (_, grads) = head.loss_and_gradients(batch.pooled(), batch.targets(), batch.masks())?;
    let analytic = grads.flatten();
    let mut probe = head.clone();
    let mut worst = 0.0f64;
    for (i, &g) in analytic.iter().enumerate() {
        let g_a = distort(g);
        let original = *probe.param_mut(i);
        *probe.param_mut(i) = original + epsilon;
        let up = probe.loss(batch.pooled(), batch.targets(), batch.masks())?;
        *probe.param_mut(i) = original - epsilon;
        let down = probe.loss(batch.pooled(), batch.targets(), batch.masks())?;
        *probe.param_mut(i) = original;
        let g_n = (up - down) / (2.0 * epsilon);
        let denom = g_a.abs().max(g_n.abs()).max(1e-8);
        worst = worst.max((g_a - g_n).abs() / denom);
    }
    Ok(worst)
}
