//! Probe serialization: one JSON file with the metadata needed to
//! reproduce training plus a base64 float32 weight blob.
//!
//! Blob layout matches the forward pass: linear probes store w then b;
//! MLP probes store w1 row-major, then b1, w2, b2. Weights are
//! truncated to f32 on save, which preserves decisions and directions
//! at far better than the tolerances used anywhere downstream.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::train::TrainSettings;
use super::{Probe, ProbeKind, ProbeWeights};

#[derive(Serialize, Deserialize)]
struct ProbeFile {
    id: String,
    kind: ProbeKind,
    layer: usize,
    input_dim: usize,
    hidden_dim: usize,
    train_seed: u64,
    test_accuracy: Option<f64>,
    converged: bool,
    settings: TrainSettings,
    train_class_counts: [usize; 2],
    dataset_fingerprint: String,
    weights_b64: String,
}

/// Stable identifier: kind, layer, seed, and a prefix of the training
/// split's fingerprint.
pub fn probe_id(probe: &Probe) -> String {
    let fp = &probe.dataset_fingerprint;
    format!(
        "probe-{}-layer{}-seed{}-{}",
        probe.kind.slug(),
        probe.layer,
        probe.train_seed,
        &fp[..fp.len().min(8)]
    )
}

fn pack(weights: &ProbeWeights) -> Vec<u8> {
    let mut values: Vec<f64> = Vec::new();
    match weights {
        ProbeWeights::Linear { w, b } => {
            values.extend_from_slice(w);
            values.push(*b);
        }
        ProbeWeights::Mlp { w1, b1, w2, b2 } => {
            for row in w1 {
                values.extend_from_slice(row);
            }
            values.extend_from_slice(b1);
            values.extend_from_slice(w2);
            values.push(*b2);
        }
    }
    let mut bytes = Vec::with_capacity(values.len() * 4);
    for v in values {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    bytes
}

pub fn save_probe(probe: &Probe, path: &Path) -> Result<()> {
    let file = ProbeFile {
        id: probe_id(probe),
        kind: probe.kind,
        layer: probe.layer,
        input_dim: probe.input_dim(),
        hidden_dim: probe.hidden_dim(),
        train_seed: probe.train_seed,
        test_accuracy: probe.test_accuracy,
        converged: probe.converged,
        settings: probe.settings,
        train_class_counts: probe.train_class_counts,
        dataset_fingerprint: probe.dataset_fingerprint.clone(),
        weights_b64: B64.encode(pack(&probe.weights)),
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_probe(path: &Path) -> Result<Probe> {
    let bad = |msg: String| Error::Format {
        path: path.display().to_string(),
        line: 0,
        msg,
    };
    let text = std::fs::read_to_string(path)?;
    let file: ProbeFile = serde_json::from_str(&text)?;
    let bytes = B64
        .decode(file.weights_b64.as_bytes())
        .map_err(|e| bad(format!("weight blob is not valid base64: {e}")))?;
    if bytes.len() % 4 != 0 {
        return Err(bad(format!("weight blob has {} bytes", bytes.len())));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    let (d, h) = (file.input_dim, file.hidden_dim);
    let expected = match file.kind {
        ProbeKind::Linear => d + 1,
        ProbeKind::Mlp => h * d + 2 * h + 1,
    };
    if values.len() != expected {
        return Err(bad(format!(
            "expected {expected} weights for a {} probe of dims {d}x{h}, found {}",
            file.kind.slug(),
            values.len()
        )));
    }
    let weights = match file.kind {
        ProbeKind::Linear => ProbeWeights::Linear {
            w: values[..d].to_vec(),
            b: values[d],
        },
        ProbeKind::Mlp => ProbeWeights::Mlp {
            w1: (0..h).map(|j| values[j * d..(j + 1) * d].to_vec()).collect(),
            b1: values[h * d..h * d + h].to_vec(),
            w2: values[h * d + h..h * d + 2 * h].to_vec(),
            b2: values[h * d + 2 * h],
        },
    };
    Ok(Probe {
        kind: file.kind,
        layer: file.layer,
        weights,
        train_seed: file.train_seed,
        test_accuracy: file.test_accuracy,
        converged: file.converged,
        settings: file.settings,
        train_class_counts: file.train_class_counts,
        dataset_fingerprint: file.dataset_fingerprint,
    })
}
