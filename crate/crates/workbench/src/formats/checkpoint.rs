use std::io::Read;
use std::num::NonZeroUsize;
use std::path::Path;

use dsr_core::scorer::{ScorerConfig, ScoringHead};
use serde::{Deserialize, Serialize};

use super::{open, write_file, FormatError, Result};

/// A trained head together with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ScorerConfig,
    pub head: ScoringHead,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRec {
    h: usize,
    hidden: usize,
    text_max: usize,
    span_max: usize,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    epochs: usize,
    batch_size: Option<NonZeroUsize>,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointRec {
    config: ConfigRec,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: [f64; 3],
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        let c = &self.config;
        let rec = CheckpointRec {
            config: ConfigRec {
                h: c.h,
                hidden: c.hidden,
                text_max: c.text_max,
                span_max: c.span_max,
                lr: c.lr,
                beta1: c.beta1,
                beta2: c.beta2,
                eps: c.eps,
                epochs: c.epochs,
                batch_size: c.batch_size,
                seed: c.seed,
            },
            w1: self.head.w1.clone(),
            b1: self.head.b1.clone(),
            w2: self.head.w2.clone(),
            b2: self.head.b2,
        };
        let mut s = serde_json::to_string(&rec).expect("checkpoint serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: CheckpointRec = serde_json::from_str(s).map_err(|e| FormatError::Invalid(format!("checkpoint: {e}")))?;
        let c = rec.config;
        let config = ScorerConfig {
            h: c.h,
            text_max: c.text_max,
            span_max: c.span_max,
            hidden: c.hidden,
            lr: c.lr,
            beta1: c.beta1,
            beta2: c.beta2,
            eps: c.eps,
            epochs: c.epochs,
            batch_size: c.batch_size,
            seed: c.seed,
        };
        config.validate()?;
        let head = ScoringHead::from_parts(config.h, config.hidden, rec.w1, rec.b1, rec.w2, rec.b2)?;
        Ok(Self { config, head })
    }
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut s = String::new();
    open(path)?.read_to_string(&mut s).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Checkpoint::from_json(&s)
}

pub fn write_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<()> {
    write_file(path, &checkpoint.to_json())
}
