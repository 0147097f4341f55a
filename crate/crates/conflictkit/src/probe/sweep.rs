//! Layer sweeps: train probes per (layer, seed), aggregate test
//! accuracy, and test each layer against chance.
//!
//! A sweep resplits the dataset with each seed, so per-seed spread
//! comes from the split even though linear training itself is
//! deterministic. Cross-domain transfer reuses the same machinery but
//! evaluates every probe on the full dataset of the other domain.

use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::backend::{capture_batch, ModelBackend};
use crate::categorize::ResponseRecord;
use crate::error::{Error, Result};

use super::train::{probe_accuracy, train_linear_probe, train_mlp_probe, TrainSettings};
use super::{build_probe_dataset, split_dataset, LabelScheme, Probe, ProbeDataset, ProbeKind};

/// Sweep-wide knobs. Seeds double as split and train seeds; at least
/// two are needed for the per-layer t-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub train_fraction: f64,
    pub seeds: Vec<u64>,
    /// MLP hidden width; None picks input_dim / 4 (floored, min 1).
    pub hidden: Option<usize>,
    pub train: TrainSettings,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seeds: vec![1, 10, 42, 99, 777],
            hidden: None,
            train: TrainSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub layer: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LayerSweepTable {
    pub rows: Vec<SweepRow>,
}

impl LayerSweepTable {
    pub fn row(&self, layer: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.layer == layer)
    }
}

/// A sweep's table plus every probe it trained (layer-major, seed-minor)
/// so callers can keep the best one by test accuracy.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub table: LayerSweepTable,
    pub probes: Vec<Probe>,
}

impl SweepOutcome {
    /// Highest test accuracy among the trained probes, restricted to a
    /// kind. Ties go to the earliest (lowest layer, then first seed).
    pub fn best_probe(&self, kind: ProbeKind) -> Option<&Probe> {
        self.probes
            .iter()
            .filter(|p| p.kind == kind)
            .max_by(|a, b| {
                let (x, y) = (a.test_accuracy.unwrap_or(0.0), b.test_accuracy.unwrap_or(0.0));
                x.partial_cmp(&y).unwrap().then(std::cmp::Ordering::Greater)
            })
    }
}

fn train_one(
    train: &ProbeDataset,
    kind: ProbeKind,
    seed: u64,
    cfg: &SweepConfig,
) -> Result<Probe> {
    match kind {
        ProbeKind::Linear => train_linear_probe(train, seed, &cfg.train),
        ProbeKind::Mlp => {
            let hidden = cfg.hidden.unwrap_or_else(|| (train.dim() / 4).max(1));
            train_mlp_probe(train, hidden, seed, &cfg.train)
        }
    }
}

/// Sweeps pre-built per-layer datasets: split, train, and score per
/// seed, then aggregate each layer with a t-test against chance 0.5.
pub fn sweep_datasets(
    datasets: &[ProbeDataset],
    kind: ProbeKind,
    cfg: &SweepConfig,
) -> Result<SweepOutcome> {
    if datasets.is_empty() {
        return Err(Error::EmptySet("no datasets to sweep".into()));
    }
    let mut rows = Vec::new();
    let mut probes = Vec::new();
    for ds in datasets {
        let mut accs = Vec::new();
        for &seed in &cfg.seeds {
            let (train, test) = split_dataset(ds, cfg.train_fraction, seed)?;
            let mut probe = train_one(&train, kind, seed, cfg)?;
            let acc = probe_accuracy(&probe, &test);
            probe.test_accuracy = Some(acc);
            accs.push(acc);
            probes.push(probe);
        }
        rows.push(aggregate(ds.layer, &accs)?);
    }
    Ok(SweepOutcome {
        table: LayerSweepTable { rows },
        probes,
    })
}

/// Captures activations for the prompts at each layer, labels them per
/// the scheme, and sweeps. `prompts` are (id, text) pairs; under
/// ByContextType they may include plain-query prompts with no record.
pub fn layer_sweep(
    backend: &dyn ModelBackend,
    prompts: &[(String, String)],
    records: &[ResponseRecord],
    layers: &[usize],
    scheme: LabelScheme,
    kind: ProbeKind,
    cfg: &SweepConfig,
) -> Result<SweepOutcome> {
    let matrices = capture_batch(backend, prompts, layers)?;
    let datasets = matrices
        .iter()
        .map(|m| build_probe_dataset(records, m, scheme))
        .collect::<Result<Vec<_>>>()?;
    sweep_datasets(&datasets, kind, cfg)
}

/// Cross-domain transfer: probes train on a split of `train_sets` and
/// are scored on the entire same-layer dataset in `eval_sets` (training
/// never sees that domain, so no rows are held out).
pub fn transfer_sweep(
    train_sets: &[ProbeDataset],
    eval_sets: &[ProbeDataset],
    kind: ProbeKind,
    cfg: &SweepConfig,
) -> Result<SweepOutcome> {
    if train_sets.is_empty() {
        return Err(Error::EmptySet("no datasets to sweep".into()));
    }
    if train_sets.len() != eval_sets.len() {
        return Err(Error::Alignment(format!(
            "{} train layers vs {} eval layers",
            train_sets.len(),
            eval_sets.len()
        )));
    }
    let mut rows = Vec::new();
    let mut probes = Vec::new();
    for (src, dst) in train_sets.iter().zip(eval_sets) {
        if src.layer != dst.layer {
            return Err(Error::LayerMismatch {
                a: src.layer,
                b: dst.layer,
            });
        }
        if src.dim() != dst.dim() {
            return Err(Error::DimensionMismatch {
                expected: src.dim(),
                got: dst.dim(),
            });
        }
        let mut accs = Vec::new();
        for &seed in &cfg.seeds {
            let (train, _) = split_dataset(src, cfg.train_fraction, seed)?;
            let mut probe = train_one(&train, kind, seed, cfg)?;
            let acc = probe_accuracy(&probe, dst);
            probe.test_accuracy = Some(acc);
            accs.push(acc);
            probes.push(probe);
        }
        rows.push(aggregate(src.layer, &accs)?);
    }
    Ok(SweepOutcome {
        table: LayerSweepTable { rows },
        probes,
    })
}

fn aggregate(layer: usize, accs: &[f64]) -> Result<SweepRow> {
    let (mean, std) = mean_std(accs);
    let p_value = significance_test(accs, 0.5)?;
    Ok(SweepRow {
        layer,
        accuracy_mean: mean,
        accuracy_std: std,
        p_value,
        significant: p_value < 0.01,
    })
}

fn mean_std(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if vals.len() < 2 {
        return (mean, 0.0);
    }
    let ss = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Two-sided one-sample t-test of the accuracies against `null_mean`.
/// Zero variance degenerates to p = 1.0 on the null and 0.0 off it.
pub fn significance_test(accuracies: &[f64], null_mean: f64) -> Result<f64> {
    if accuracies.len() < 2 {
        return Err(Error::TooFewSamples(format!(
            "t-test needs at least 2 samples, got {}",
            accuracies.len()
        )));
    }
    let n = accuracies.len() as f64;
    let (mean, std) = mean_std(accuracies);
    if std == 0.0 {
        return Ok(if mean == null_mean { 1.0 } else { 0.0 });
    }
    let t = (mean - null_mean) / (std / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0)
        .map_err(|e| Error::Config(format!("t distribution: {e}")))?;
    Ok((2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0))
}

/// One row of the transfer table. Cells are absent when the run did not
/// cover that domain or direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub layer: usize,
    pub qa: Option<f64>,
    pub code: Option<f64>,
    pub ldt_mean: Option<f64>,
    pub ldt_std: Option<f64>,
    pub ldt_sig: Option<bool>,
    pub nldt_mean: Option<f64>,
    pub nldt_std: Option<f64>,
    pub nldt_sig: Option<bool>,
}

/// Merges in-domain and transfer sweeps into rows keyed by layer.
/// `qa`/`code` take the in-domain means; `ldt`/`nldt` are the linear
/// and MLP QA-to-code transfer sweeps.
pub fn transfer_table(
    qa: Option<&LayerSweepTable>,
    code: Option<&LayerSweepTable>,
    ldt: Option<&LayerSweepTable>,
    nldt: Option<&LayerSweepTable>,
) -> Vec<TransferRow> {
    let mut layers: Vec<usize> = [qa, code, ldt, nldt]
        .iter()
        .flatten()
        .flat_map(|t| t.rows.iter().map(|r| r.layer))
        .collect();
    layers.sort_unstable();
    layers.dedup();
    layers
        .into_iter()
        .map(|layer| {
            fn pick(t: Option<&LayerSweepTable>, layer: usize) -> Option<&SweepRow> {
                t.and_then(|t| t.row(layer))
            }
            let (l, n) = (pick(ldt, layer), pick(nldt, layer));
            TransferRow {
                layer,
                qa: pick(qa, layer).map(|r| r.accuracy_mean),
                code: pick(code, layer).map(|r| r.accuracy_mean),
                ldt_mean: l.map(|r| r.accuracy_mean),
                ldt_std: l.map(|r| r.accuracy_std),
                ldt_sig: l.map(|r| r.significant),
                nldt_mean: n.map(|r| r.accuracy_mean),
                nldt_std: n.map(|r| r.accuracy_std),
                nldt_sig: n.map(|r| r.significant),
            }
        })
        .collect()
}

/// Writes the sweep CSV. Accuracies are percentages with two decimals;
/// absent cells print "--".
pub fn write_sweep_csv(path: &Path, rows: &[TransferRow]) -> Result<()> {
    let pct = |v: Option<f64>| match v {
        Some(v) => format!("{:.2}", v * 100.0),
        None => "--".into(),
    };
    let flag = |v: Option<bool>| match v {
        Some(v) => v.to_string(),
        None => "--".into(),
    };
    let mut out =
        String::from("layer,qa,code,ldt_mean,ldt_std,nldt_mean,nldt_std,ldt_sig,nldt_sig\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.layer,
            pct(row.qa),
            pct(row.code),
            pct(row.ldt_mean),
            pct(row.ldt_std),
            pct(row.nldt_mean),
            pct(row.nldt_std),
            flag(row.ldt_sig),
            flag(row.nldt_sig),
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}
