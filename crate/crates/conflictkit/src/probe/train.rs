//! Probe training: full-batch Adam on binary cross-entropy.
//!
//! The objective is mean BCE of sigma(logit) plus an L2 penalty on the
//! weight matrices (biases unpenalized), which keeps the optimum finite
//! on separable data so the convergence test is meaningful. Linear
//! probes start from zero weights and are fully deterministic in the
//! data; MLP probes draw their init from the train seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Probe, ProbeDataset, ProbeKind, ProbeWeights};

/// Optimizer hyperparameters. Probe quality should not hinge on these,
/// but to keep results auditable the values used are frozen into every
/// saved probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Relative loss-change threshold that counts as converged.
    pub tolerance: f64,
    /// L2 coefficient on weights (not biases).
    pub l2: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            max_iters: 2000,
            tolerance: 1e-7,
            l2: 1e-4,
        }
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(dim: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * g;
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * g * g;
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + EPS);
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable BCE for one sample given the raw logit.
fn bce(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

fn check_trainable(train: &ProbeDataset) -> Result<()> {
    let [zeros, ones] = train.class_counts();
    if zeros == 0 || ones == 0 {
        return Err(Error::SingleClass(format!(
            "training set has {zeros} negatives and {ones} positives"
        )));
    }
    if train.dim() == 0 {
        return Err(Error::Config("training rows have zero width".into()));
    }
    Ok(())
}

/// Logistic regression probe. Deterministic given the data; the seed is
/// recorded for provenance and to pair the probe with its split.
pub fn train_linear_probe(
    train: &ProbeDataset,
    seed: u64,
    settings: &TrainSettings,
) -> Result<Probe> {
    check_trainable(train)?;
    let n = train.len();
    let d = train.dim();
    let inv_n = 1.0 / n as f64;

    // params = [w.., b]
    let mut params = vec![0.0; d + 1];
    let mut adam = Adam::new(d + 1, settings.learning_rate);
    let mut grad = vec![0.0; d + 1];
    let mut prev_loss = f64::INFINITY;
    let mut converged = false;

    for _ in 0..settings.max_iters {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for (row, &label) in train.x.iter().zip(&train.y) {
            let y = f64::from(label);
            let z = dot(&params[..d], row) + params[d];
            loss += bce(z, y);
            let dz = (sigmoid(z) - y) * inv_n;
            for (g, &xi) in grad[..d].iter_mut().zip(row) {
                *g += dz * xi;
            }
            grad[d] += dz;
        }
        loss *= inv_n;
        for i in 0..d {
            loss += 0.5 * settings.l2 * params[i] * params[i];
            grad[i] += settings.l2 * params[i];
        }
        adam.step(&mut params, &grad);
        if (prev_loss - loss).abs() <= settings.tolerance * loss.max(1.0) {
            converged = true;
            break;
        }
        prev_loss = loss;
    }

    let b = params[d];
    params.truncate(d);
    Ok(Probe {
        kind: ProbeKind::Linear,
        layer: train.layer,
        weights: ProbeWeights::Linear { w: params, b },
        train_seed: seed,
        test_accuracy: None,
        converged,
        settings: *settings,
        train_class_counts: train.class_counts(),
        dataset_fingerprint: train.fingerprint.clone(),
    })
}

/// Two-layer ReLU MLP probe with `hidden` units. Init is Xavier-uniform
/// drawn from the train seed.
pub fn train_mlp_probe(
    train: &ProbeDataset,
    hidden: usize,
    seed: u64,
    settings: &TrainSettings,
) -> Result<Probe> {
    if hidden == 0 {
        return Err(Error::Config("mlp hidden width must be positive".into()));
    }
    check_trainable(train)?;
    let n = train.len();
    let d = train.dim();
    let h = hidden;
    let inv_n = 1.0 / n as f64;

    // params = [w1 row-major (h*d), b1 (h), w2 (h), b2]
    let n_params = h * d + h + h + 1;
    let mut params = vec![0.0; n_params];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a1 = (6.0 / (d + h) as f64).sqrt();
    for p in params[..h * d].iter_mut() {
        *p = rng.gen_range(-a1..a1);
    }
    let a2 = (6.0 / (h + 1) as f64).sqrt();
    for p in params[h * d + h..h * d + 2 * h].iter_mut() {
        *p = rng.gen_range(-a2..a2);
    }

    let mut adam = Adam::new(n_params, settings.learning_rate);
    let mut grad = vec![0.0; n_params];
    let mut act = vec![0.0; h];
    let mut prev_loss = f64::INFINITY;
    let mut converged = false;
    let (w1_end, b1_end, w2_end) = (h * d, h * d + h, h * d + 2 * h);

    for _ in 0..settings.max_iters {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for (row, &label) in train.x.iter().zip(&train.y) {
            let y = f64::from(label);
            for j in 0..h {
                let pre = dot(&params[j * d..(j + 1) * d], row) + params[w1_end + j];
                act[j] = pre.max(0.0);
            }
            let z = dot(&params[b1_end..w2_end], &act) + params[w2_end];
            loss += bce(z, y);
            let dz = (sigmoid(z) - y) * inv_n;
            grad[w2_end] += dz;
            for j in 0..h {
                grad[b1_end + j] += dz * act[j];
                if act[j] > 0.0 {
                    let dpre = dz * params[b1_end + j];
                    grad[w1_end + j] += dpre;
                    for (g, &xi) in grad[j * d..(j + 1) * d].iter_mut().zip(row) {
                        *g += dpre * xi;
                    }
                }
            }
        }
        loss *= inv_n;
        for i in (0..w1_end).chain(b1_end..w2_end) {
            loss += 0.5 * settings.l2 * params[i] * params[i];
            grad[i] += settings.l2 * params[i];
        }
        adam.step(&mut params, &grad);
        if (prev_loss - loss).abs() <= settings.tolerance * loss.max(1.0) {
            converged = true;
            break;
        }
        prev_loss = loss;
    }

    let w1 = (0..h).map(|j| params[j * d..(j + 1) * d].to_vec()).collect();
    let b1 = params[w1_end..b1_end].to_vec();
    let w2 = params[b1_end..w2_end].to_vec();
    let b2 = params[w2_end];
    Ok(Probe {
        kind: ProbeKind::Mlp,
        layer: train.layer,
        weights: ProbeWeights::Mlp { w1, b1, w2, b2 },
        train_seed: seed,
        test_accuracy: None,
        converged,
        settings: *settings,
        train_class_counts: train.class_counts(),
        dataset_fingerprint: train.fingerprint.clone(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Raw decision score for one activation row; the predicted label is
/// 1 exactly when the logit is positive.
pub fn probe_logit(probe: &Probe, row: &[f64]) -> f64 {
    match &probe.weights {
        ProbeWeights::Linear { w, b } => dot(w, row) + b,
        ProbeWeights::Mlp { w1, b1, w2, b2 } => {
            let mut z = *b2;
            for ((wj, bj), vj) in w1.iter().zip(b1).zip(w2) {
                z += vj * (dot(wj, row) + bj).max(0.0);
            }
            z
        }
    }
}

/// Fraction of rows whose predicted label matches.
pub fn probe_accuracy(probe: &Probe, ds: &ProbeDataset) -> f64 {
    if ds.is_empty() {
        return 0.0;
    }
    let hits = ds
        .x
        .iter()
        .zip(&ds.y)
        .filter(|(row, &y)| u8::from(probe_logit(probe, row) > 0.0) == y)
        .count();
    hits as f64 / ds.len() as f64
}
