use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{pool_span, EmbeddedText, ScorerConfig, ScoringHead};
use crate::error::{Error, Result};
use crate::hash::SplitMix64;
use crate::types::ScoredSpan;

/// Pooled span vectors with their targets and masks.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingBatch {
    pub h: usize,
    pooled: Vec<f64>,
    targets: Vec<[f64; 3]>,
    masks: Vec<[bool; 3]>,
}

impl TrainingBatch {
    /// Masked target cells are stored as `0.0` whatever the input holds.
    pub fn new(h: usize, pooled: Vec<f64>, targets: Vec<[f64; 3]>, masks: Vec<[bool; 3]>) -> Result<Self> {
        let n = targets.len();
        if h == 0 || pooled.len() != n * h || masks.len() != n {
            return Err(Error::Shape(format!(
                "batch with h={h}: {} pooled values, {n} targets, {} masks",
                pooled.len(),
                masks.len()
            )));
        }
        if pooled.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("pooled vectors"));
        }
        let mut clean = Vec::with_capacity(n);
        for (y, m) in targets.iter().zip(&masks) {
            let mut row = [0.0; 3];
            for k in 0..3 {
                if m[k] {
                    if !(-1.0..=1.0).contains(&y[k]) {
                        return Err(Error::ScoreOutOfRange(y[k]));
                    }
                    row[k] = y[k];
                }
            }
            clean.push(row);
        }
        Ok(Self {
            h,
            pooled,
            targets: clean,
            masks,
        })
    }

    /// Pools every scored span against the embedding of its text.
    pub fn from_spans(embedded: &[EmbeddedText], spans: &[ScoredSpan], config: &ScorerConfig) -> Result<Self> {
        let by_id: BTreeMap<&str, &EmbeddedText> = embedded.iter().map(|e| (e.text_id.as_str(), e)).collect();
        let mut per_text: BTreeMap<&str, usize> = BTreeMap::new();
        let mut pooled = Vec::with_capacity(spans.len() * config.h);
        let mut targets = Vec::with_capacity(spans.len());
        let mut masks = Vec::with_capacity(spans.len());
        for s in spans.iter().filter(|s| s.is_scored()) {
            let e = by_id
                .get(s.span.text_id.as_str())
                .ok_or_else(|| Error::UnknownText(s.span.text_id.clone()))?;
            if e.h != config.h {
                return Err(Error::WidthMismatch {
                    text_id: e.text_id.clone(),
                    expected: config.h,
                    found: e.h,
                });
            }
            let count = per_text.entry(e.text_id.as_str()).or_default();
            *count += 1;
            if *count > config.span_max {
                return Err(Error::InvalidConfig(format!(
                    "text `{}` has more than {} spans",
                    e.text_id, config.span_max
                )));
            }
            pooled.extend(pool_span(e, &s.span)?);
            targets.push(s.regard.scores());
            masks.push(s.regard.mask());
        }
        Self::new(config.h, pooled, targets, masks)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn pooled(&self) -> &[f64] {
        &self.pooled
    }

    pub fn targets(&self) -> &[[f64; 3]] {
        &self.targets
    }

    pub fn masks(&self) -> &[[bool; 3]] {
        &self.masks
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.pooled[i * self.h..(i + 1) * self.h]
    }

    /// Number of labelled entries (`N` in the loss).
    pub fn unmasked_count(&self) -> usize {
        self.masks.iter().flatten().filter(|m| **m).count()
    }

    /// Row indices sorted by content, so training does not depend on the
    /// order examples were supplied in.
    fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            let rows = self
                .row(a)
                .iter()
                .zip(self.row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal);
            rows.then_with(|| {
                self.targets[a]
                    .iter()
                    .zip(&self.targets[b])
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| self.masks[a].cmp(&self.masks[b]))
        });
        idx
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossHistory {
    /// Mean training loss of each epoch, measured before that epoch's updates.
    pub per_epoch: Vec<f64>,
    /// Running minimum of `per_epoch`.
    pub best: Vec<f64>,
}

impl LossHistory {
    fn push(&mut self, loss: f64) {
        let best = self.best.last().map_or(loss, |b| b.min(loss));
        self.per_epoch.push(loss);
        self.best.push(best);
    }

    pub fn last(&self) -> Option<f64> {
        self.per_epoch.last().copied()
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

/// Fits a freshly initialized head with Adam on the masked squared error.
///
/// Deterministic for a given config: examples are put in a canonical order
/// before batching, and mini-batches (when `batch_size` is set) are drawn
/// from a seeded shuffle.
pub fn train(data: &TrainingBatch, config: &ScorerConfig) -> Result<(ScoringHead, LossHistory)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.h != config.h {
        return Err(Error::Shape(format!("dataset width {} but config h={}", data.h, config.h)));
    }
    if data.unmasked_count() == 0 {
        return Err(Error::NoUnmaskedEntries);
    }

    let mut head = ScoringHead::init(config.h, config.hidden, config.seed);
    let mut adam = Adam {
        m: vec![0.0; head.n_params()],
        v: vec![0.0; head.n_params()],
        step: 0,
    };
    let order = data.canonical_order();
    let mut shuffler = SplitMix64::new(config.seed ^ 0xa076_1d64_78bd_642f);
    let mut history = LossHistory::default();

    for epoch in 0..config.epochs {
        let batches: Vec<Vec<usize>> = match config.batch_size {
            Some(size) if size.get() < order.len() => {
                let mut shuffled = order.clone();
                for i in (1..shuffled.len()).rev() {
                    let j = shuffler.next_index(i + 1);
                    shuffled.swap(i, j);
                }
                shuffled.chunks(size.get()).map(<[usize]>::to_vec).collect()
            }
            _ => vec![order.clone()],
        };

        let mut weighted = 0.0;
        let mut entries = 0usize;
        for batch in &batches {
            let n_batch: usize = batch
                .iter()
                .map(|&i| data.masks[i].iter().filter(|m| **m).count())
                .sum();
            if n_batch == 0 {
                continue;
            }
            let (loss, grads) = head
                .loss_and_gradients_subset(&data.pooled, &data.targets, &data.masks, Some(batch))
                .map_err(|e| match e {
                    Error::NonFinite(_) => Error::Diverged { epoch },
                    other => other,
                })?;
            weighted += loss * n_batch as f64;
            entries += n_batch;

            adam.step += 1;
            let c1 = 1.0 - libm::pow(config.beta1, adam.step as f64);
            let c2 = 1.0 - libm::pow(config.beta2, adam.step as f64);
            let (m, v) = (&mut adam.m, &mut adam.v);
            head.for_each_param_mut(&grads, |i, p, g| {
                m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
                v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                *p -= config.lr * m_hat / (libm::sqrt(v_hat) + config.eps);
            });
        }
        let epoch_loss = weighted / entries as f64;
        if !epoch_loss.is_finite()
            || head.w1.iter().chain(&head.b1).chain(&head.w2).chain(&head.b2).any(|p| !p.is_finite())
        {
            return Err(Error::Diverged { epoch });
        }
        history.push(epoch_loss);
    }
    Ok((head, history))
}
