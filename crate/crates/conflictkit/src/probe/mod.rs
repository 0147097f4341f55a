//! Per-layer probes over residual-stream activations.
//!
//! Captured activations become labeled datasets in one of two ways:
//! by the category of the response that the prompt produced (Parametric
//! vs Conflicting, the probing target proper) or by the kind of prompt
//! (conflict context vs plain query, used for steering means and for
//! backends whose conflict responses are single-class). Linear and MLP
//! probes train on those datasets with full-batch Adam on binary
//! cross-entropy, layer sweeps aggregate test accuracy over seeds, and
//! a t-test against chance marks significant layers.

mod persist;
mod sweep;
mod train;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backend::ActivationMatrix;
use crate::categorize::{CategoryLabel, ResponseRecord};
use crate::config::hex;
use crate::error::{Error, Result};

pub use persist::{load_probe, probe_id, save_probe};
pub use sweep::{
    layer_sweep, significance_test, sweep_datasets, transfer_sweep, transfer_table,
    write_sweep_csv, LayerSweepTable, SweepConfig, SweepOutcome, SweepRow, TransferRow,
};
pub use train::{probe_accuracy, probe_logit, train_linear_probe, train_mlp_probe, TrainSettings};

/// How activation rows get their binary labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelScheme {
    /// Parametric responses -> 0, Conflicting -> 1; Other and
    /// parse-failed records are dropped.
    ByResponseCategory,
    /// Rows from conflict prompts -> 1, rows from plain queries -> 0.
    ByContextType,
}

/// Labeled activations for one layer. Rows are f64 so training does not
/// accumulate error on top of the f32 capture precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeDataset {
    pub layer: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
    pub label_scheme: LabelScheme,
    /// Seed of the split that produced this dataset; 0 before any split.
    pub split_seed: u64,
    /// Content address over layer, shape, labels, and data. Computed by
    /// [`ProbeDataset::new`]; stale if fields are mutated afterwards.
    pub fingerprint: String,
}

impl ProbeDataset {
    pub fn new(
        layer: usize,
        x: Vec<Vec<f64>>,
        y: Vec<u8>,
        label_scheme: LabelScheme,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Alignment(format!(
                "{} rows vs {} labels",
                x.len(),
                y.len()
            )));
        }
        let dim = x.first().map(Vec::len).unwrap_or(0);
        for (i, row) in x.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if !row.iter().all(|v| v.is_finite()) {
                return Err(Error::Alignment(format!("row {i} has a non-finite value")));
            }
        }
        if let Some(bad) = y.iter().find(|&&l| l > 1) {
            return Err(Error::Alignment(format!("label {bad} is not binary")));
        }
        let fingerprint = fingerprint(layer, &x, &y);
        Ok(Self {
            layer,
            x,
            y,
            label_scheme,
            split_seed: 0,
            fingerprint,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map(Vec::len).unwrap_or(0)
    }

    /// Samples per class, reported beside every accuracy (no reweighting
    /// is applied anywhere).
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.y.iter().filter(|&&l| l == 1).count();
        [self.y.len() - ones, ones]
    }
}

fn fingerprint(layer: usize, x: &[Vec<f64>], y: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update((layer as u64).to_le_bytes());
    h.update((x.len() as u64).to_le_bytes());
    h.update((x.first().map(Vec::len).unwrap_or(0) as u64).to_le_bytes());
    h.update(y);
    for row in x {
        for v in row {
            h.update((*v as f32).to_le_bytes());
        }
    }
    hex(&h.finalize()[..8])
}

/// Pairs activation rows with binary labels.
///
/// ByResponseCategory requires `acts.prompt_ids` to equal the record
/// case ids in order; Other-categorized and parse-failed records are
/// dropped. ByContextType labels every row whose id matches a record 1
/// (conflict prompt) and every remaining row 0 (plain query); each
/// record must still have a matching row and ids must be unique.
pub fn build_probe_dataset(
    records: &[ResponseRecord],
    acts: &ActivationMatrix,
    scheme: LabelScheme,
) -> Result<ProbeDataset> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    match scheme {
        LabelScheme::ByResponseCategory => {
            if records.len() != acts.prompt_ids.len() {
                return Err(Error::Alignment(format!(
                    "{} records vs {} activation rows",
                    records.len(),
                    acts.prompt_ids.len()
                )));
            }
            for (i, (record, id)) in records.iter().zip(&acts.prompt_ids).enumerate() {
                if record.case_id != *id {
                    return Err(Error::Alignment(format!(
                        "row {i}: record {} vs prompt {id}",
                        record.case_id
                    )));
                }
                if !record.response_parse_ok {
                    continue;
                }
                let label = match record.category.label {
                    CategoryLabel::Parametric => 0,
                    CategoryLabel::Conflicting => 1,
                    CategoryLabel::Other => continue,
                };
                x.push(acts.vectors[i].iter().map(|&v| f64::from(v)).collect());
                y.push(label);
            }
        }
        LabelScheme::ByContextType => {
            let mut seen = BTreeSet::new();
            for id in &acts.prompt_ids {
                if !seen.insert(id.as_str()) {
                    return Err(Error::Alignment(format!("duplicate prompt id {id}")));
                }
            }
            let conflict_ids: BTreeSet<&str> =
                records.iter().map(|r| r.case_id.as_str()).collect();
            for record in records {
                if !seen.contains(record.case_id.as_str()) {
                    return Err(Error::Alignment(format!(
                        "record {} has no activation row",
                        record.case_id
                    )));
                }
            }
            for (row, id) in acts.vectors.iter().zip(&acts.prompt_ids) {
                x.push(row.iter().map(|&v| f64::from(v)).collect());
                y.push(u8::from(conflict_ids.contains(id.as_str())));
            }
        }
    }
    let ds = ProbeDataset::new(acts.layer, x, y, scheme)?;
    let [zeros, ones] = ds.class_counts();
    if zeros == 0 || ones == 0 {
        return Err(Error::SingleClass(format!(
            "layer {}: {zeros} negatives, {ones} positives",
            ds.layer
        )));
    }
    Ok(ds)
}

/// Stratified deterministic split. Per class the train side takes
/// round(fraction * n) rows, clamped so both sides keep at least one;
/// classes with fewer than two rows cannot satisfy that and error.
pub fn split_dataset(
    ds: &ProbeDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(ProbeDataset, ProbeDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in 0..2u8 {
        let mut idx: Vec<usize> = (0..ds.len()).filter(|&i| ds.y[i] == class).collect();
        if idx.len() < 2 {
            return Err(Error::TooFewSamples(format!(
                "class {class} has {} samples, need at least 2 to split",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let take = ((train_fraction * idx.len() as f64).round() as usize)
            .clamp(1, idx.len() - 1);
        train_idx.extend_from_slice(&idx[..take]);
        test_idx.extend_from_slice(&idx[take..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let subset = |indices: &[usize]| -> Result<ProbeDataset> {
        let x = indices.iter().map(|&i| ds.x[i].clone()).collect();
        let y = indices.iter().map(|&i| ds.y[i]).collect();
        let mut sub = ProbeDataset::new(ds.layer, x, y, ds.label_scheme)?;
        sub.split_seed = seed;
        Ok(sub)
    };
    Ok((subset(&train_idx)?, subset(&test_idx)?))
}

/// Probe architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Linear,
    Mlp,
}

impl ProbeKind {
    pub fn slug(self) -> &'static str {
        match self {
            ProbeKind::Linear => "linear",
            ProbeKind::Mlp => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeWeights {
    /// Decision = sign(w.x + b).
    Linear { w: Vec<f64>, b: f64 },
    /// Two layers with a ReLU between: logit = w2.relu(W1 x + b1) + b2.
    /// `w1` holds one row per hidden unit.
    Mlp {
        w1: Vec<Vec<f64>>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: f64,
    },
}

/// A trained probe with everything needed to reload and rerun it:
/// frozen weights, the optimizer settings that produced them, and the
/// fingerprint of the training split.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub kind: ProbeKind,
    pub layer: usize,
    pub weights: ProbeWeights,
    pub train_seed: u64,
    /// None until the probe has been evaluated on a held-out split.
    pub test_accuracy: Option<f64>,
    /// False when training hit the iteration cap before the loss change
    /// fell below tolerance. Such probes are still returned and usable.
    pub converged: bool,
    pub settings: TrainSettings,
    pub train_class_counts: [usize; 2],
    pub dataset_fingerprint: String,
}

impl Probe {
    pub fn input_dim(&self) -> usize {
        match &self.weights {
            ProbeWeights::Linear { w, .. } => w.len(),
            ProbeWeights::Mlp { w1, .. } => w1.first().map(Vec::len).unwrap_or(0),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        match &self.weights {
            ProbeWeights::Linear { .. } => 0,
            ProbeWeights::Mlp { b1, .. } => b1.len(),
        }
    }
}
