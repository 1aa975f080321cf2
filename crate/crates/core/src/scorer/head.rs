use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hash::SplitMix64;

/// Two-layer regression head: `tanh(W2 tanh(W1 v + b1) + b2)`.
///
/// Weight matrices are row-major: `w1` is `hidden x h`, `w2` is `3 x hidden`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringHead {
    pub h: usize,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: [f64; 3],
}

/// Gradient of the loss, laid out like [`ScoringHead`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: [f64; 3],
}

impl Gradients {
    fn zeros(h: usize, hidden: usize) -> Self {
        Self {
            w1: vec![0.0; hidden * h],
            b1: vec![0.0; hidden],
            w2: vec![0.0; 3 * hidden],
            b2: [0.0; 3],
        }
    }

    /// Flattened in parameter order: `w1, b1, w2, b2`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.w1.len() + self.b1.len() + self.w2.len() + 3);
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.extend_from_slice(&self.b2);
        out
    }
}

/// Dot product with four independent accumulators; the summation order is
/// fixed, so results are reproducible.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4 * 4;
    for (x, y) in a[..chunks].chunks_exact(4).zip(b[..chunks].chunks_exact(4)) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in a[chunks..].iter().zip(&b[chunks..]) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl ScoringHead {
    pub fn zeros(h: usize, hidden: usize) -> Self {
        Self {
            h,
            hidden,
            w1: vec![0.0; hidden * h],
            b1: vec![0.0; hidden],
            w2: vec![0.0; 3 * hidden],
            b2: [0.0; 3],
        }
    }

    /// Uniform initialization in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` from a
    /// splitmix64 stream, filling `w1, b1, w2, b2` in that order.
    pub fn init(h: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut draw = |fan_in: usize, n: usize| -> Vec<f64> {
            let bound = 1.0 / libm::sqrt(fan_in as f64);
            (0..n).map(|_| rng.next_range(-bound, bound)).collect()
        };
        let w1 = draw(h, hidden * h);
        let b1 = draw(h, hidden);
        let w2 = draw(hidden, 3 * hidden);
        let b2v = draw(hidden, 3);
        Self {
            h,
            hidden,
            w1,
            b1,
            w2,
            b2: [b2v[0], b2v[1], b2v[2]],
        }
    }

    pub fn from_parts(h: usize, hidden: usize, w1: Vec<f64>, b1: Vec<f64>, w2: Vec<f64>, b2: [f64; 3]) -> Result<Self> {
        if w1.len() != hidden * h || b1.len() != hidden || w2.len() != 3 * hidden {
            return Err(Error::Shape(format!(
                "head with h={h}, hidden={hidden} got w1={}, b1={}, w2={}",
                w1.len(),
                b1.len(),
                w2.len()
            )));
        }
        let head = Self {
            h,
            hidden,
            w1,
            b1,
            w2,
            b2,
        };
        if head.parameters().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("head parameters"));
        }
        Ok(head)
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 3
    }

    /// Flattened in parameter order: `w1, b1, w2, b2`.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.extend_from_slice(&self.b2);
        out
    }

    pub(crate) fn param_mut(&mut self, mut i: usize) -> &mut f64 {
        if i < self.w1.len() {
            return &mut self.w1[i];
        }
        i -= self.w1.len();
        if i < self.b1.len() {
            return &mut self.b1[i];
        }
        i -= self.b1.len();
        if i < self.w2.len() {
            return &mut self.w2[i];
        }
        i -= self.w2.len();
        &mut self.b2[i]
    }

    pub(crate) fn for_each_param_mut(&mut self, grads: &Gradients, mut f: impl FnMut(usize, &mut f64, f64)) {
        let mut idx = 0;
        for (p, g) in self.w1.iter_mut().zip(&grads.w1) {
            f(idx, p, *g);
            idx += 1;
        }
        for (p, g) in self.b1.iter_mut().zip(&grads.b1) {
            f(idx, p, *g);
            idx += 1;
        }
        for (p, g) in self.w2.iter_mut().zip(&grads.w2) {
            f(idx, p, *g);
            idx += 1;
        }
        for (p, g) in self.b2.iter_mut().zip(&grads.b2) {
            f(idx, p, *g);
            idx += 1;
        }
    }

    fn check_input(&self, pooled: &[f64]) -> Result<usize> {
        if self.h == 0 {
            return if pooled.is_empty() {
                Ok(0)
            } else {
                Err(Error::Shape("zero-width head given input".into()))
            };
        }
        if !pooled.len().is_multiple_of(self.h) {
            return Err(Error::Shape(format!(
                "{} pooled values are not a multiple of h={}",
                pooled.len(),
                self.h
            )));
        }
        Ok(pooled.len() / self.h)
    }

    fn hidden_layer(&self, v: &[f64], out: &mut [f64]) {
        for (j, a) in out.iter_mut().enumerate() {
            let row = &self.w1[j * self.h..(j + 1) * self.h];
            *a = libm::tanh(dot(row, v) + self.b1[j]);
        }
    }

    fn output_layer(&self, hidden: &[f64]) -> [f64; 3] {
        let mut y = [0.0; 3];
        for (k, out) in y.iter_mut().enumerate() {
            let row = &self.w2[k * self.hidden..(k + 1) * self.hidden];
            *out = libm::tanh(dot(row, hidden) + self.b2[k]);
        }
        y
    }

    /// Scores for `n` pooled span vectors laid out row-major (`n x h`).
    pub fn forward(&self, pooled: &[f64]) -> Result<Vec<[f64; 3]>> {
        let n = self.check_input(pooled)?;
        let mut hidden = vec![0.0; self.hidden];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let v = &pooled[i * self.h..(i + 1) * self.h];
            self.hidden_layer(v, &mut hidden);
            if hidden.iter().any(|a| !a.is_finite()) {
                return Err(Error::NonFinite("hidden activations"));
            }
            let y = self.output_layer(&hidden);
            if y.iter().any(|a| !a.is_finite()) {
                return Err(Error::NonFinite("head output"));
            }
            out.push(y);
        }
        Ok(out)
    }

    /// Masked mean-squared error and its gradient for every parameter.
    ///
    /// Masked target cells are never read.
    pub fn loss_and_gradients(&self, pooled: &[f64], targets: &[[f64; 3]], masks: &[[bool; 3]]) -> Result<(f64, Gradients)> {
        self.loss_and_gradients_subset(pooled, targets, masks, None)
    }

    /// As [`Self::loss_and_gradients`], restricted to the rows in `subset`
    /// (summed in the order given).
    pub(crate) fn loss_and_gradients_subset(
        &self,
        pooled: &[f64],
        targets: &[[f64; 3]],
        masks: &[[bool; 3]],
        subset: Option<&[usize]>,
    ) -> Result<(f64, Gradients)> {
        let n = self.check_input(pooled)?;
        if targets.len() != n || masks.len() != n {
            return Err(Error::Shape(format!(
                "{n} inputs, {} targets, {} masks",
                targets.len(),
                masks.len()
            )));
        }
        let all: Vec<usize>;
        let rows: &[usize] = match subset {
            Some(s) => s,
            None => {
                all = (0..n).collect();
                &all
            }
        };
        let count: usize = rows
            .iter()
            .map(|&i| masks[i].iter().filter(|m| **m).count())
            .sum();
        if count == 0 {
            return Err(Error::NoUnmaskedEntries);
        }
        let inv_n = 1.0 / count as f64;

        let mut grads = Gradients::zeros(self.h, self.hidden);
        let mut hidden = vec![0.0; self.hidden];
        let mut d_hidden = vec![0.0; self.hidden];
        let mut sse = 0.0;
        for &i in rows {
            let mask = masks[i];
            if !mask.iter().any(|m| *m) {
                continue;
            }
            let v = &pooled[i * self.h..(i + 1) * self.h];
            self.hidden_layer(v, &mut hidden);
            let y = self.output_layer(&hidden);

            let mut d_out = [0.0; 3];
            for k in 0..3 {
                if mask[k] {
                    let r = y[k] - targets[i][k];
                    sse += r * r;
                    d_out[k] = 2.0 * r * inv_n * (1.0 - y[k] * y[k]);
                }
            }
            for (k, &d) in d_out.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                grads.b2[k] += d;
                let row = &mut grads.w2[k * self.hidden..(k + 1) * self.hidden];
                for (g, a) in row.iter_mut().zip(&hidden) {
                    *g += d * a;
                }
            }
            for j in 0..self.hidden {
                let mut back = 0.0;
                for (k, d) in d_out.iter().enumerate() {
                    back += self.w2[k * self.hidden + j] * d;
                }
                d_hidden[j] = back * (1.0 - hidden[j] * hidden[j]);
            }
            for (j, &dz) in d_hidden.iter().enumerate() {
                if dz == 0.0 {
                    continue;
                }
                grads.b1[j] += dz;
                let row = &mut grads.w1[j * self.h..(j + 1) * self.h];
                for (g, x) in row.iter_mut().zip(v) {
                    *g += dz * x;
                }
            }
        }
        let loss = sse * inv_n;
        if !loss.is_finite() {
            return Err(Error::NonFinite("loss"));
        }
        Ok((loss, grads))
    }

    /// Loss alone; cheaper than [`Self::loss_and_gradients`].
    pub fn loss(&self, pooled: &[f64], targets: &[[f64; 3]], masks: &[[bool; 3]]) -> Result<f64> {
        let preds = self.forward(pooled)?;
        loss(&preds, targets, masks)
    }
}

/// Mean squared error over the unmasked entries only.
pub fn loss(predicted: &[[f64; 3]], targets: &[[f64; 3]], masks: &[[bool; 3]]) -> Result<f64> {
    if predicted.len() != targets.len() || predicted.len() != masks.len() {
        return Err(Error::Shape(format!(
            "{} predictions, {} targets, {} masks",
            predicted.len(),
            targets.len(),
            masks.len()
        )));
    }
    let mut sse = 0.0;
    let mut count = 0usize;
    for ((p, y), m) in predicted.iter().zip(targets).zip(masks) {
        for k in 0..3 {
            if m[k] {
                let r = p[k] - y[k];
                sse += r * r;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::NoUnmaskedEntries);
    }
    Ok(sse / count as f64)
}
