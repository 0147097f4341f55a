//! Model access: generation, residual capture, activation injection,
//! and attention maps behind one object-safe trait.
//!
//! Three implementations ship with the crate. [`ToyBackend`] is a tiny
//! deterministic transformer whose internals are fully known, which is
//! what makes activation-level claims testable at desk scale.
//! [`ScriptedBackend`] replays a fixed prompt-to-response table for
//! unit tests that only care about downstream logic. [`AdapterBackend`]
//! drives an external process speaking a line-oriented JSON protocol,
//! which is how real causal LMs plug in without touching this crate.
//!
//! Backends are selected by name through [`BackendRegistry`], so a
//! config file or CLI flag decides which one a run uses.

mod adapter;
pub mod dump;
mod registry;
mod scripted;
mod toy;

use serde::{Deserialize, Serialize};

use crate::conflict::DecodeParams;
use crate::error::{Error, Result};

pub use adapter::AdapterBackend;
pub use registry::{BackendFactory, BackendRegistry};
pub use scripted::ScriptedBackend;
pub use toy::{make_toy_backend, ToyBackend, CONFLICT_SENTINEL, DEFAULT_TOY_VOCAB};

/// Identity and shape of a loaded backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub name: String,
    pub n_layers: usize,
    pub hidden_dim: usize,
    /// True when identical inputs always produce identical outputs,
    /// regardless of decode parameters.
    pub deterministic: bool,
}

/// Where in the forward pass a residual vector is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionPolicy {
    /// The state at the final prompt position of the pass that emits
    /// the first generated token.
    LastPromptToken,
}

/// A batch of residual-stream vectors captured at one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationMatrix {
    pub layer: usize,
    /// Row-major, one row per prompt, `hidden_dim` columns.
    pub vectors: Vec<Vec<f32>>,
    pub prompt_ids: Vec<String>,
    pub position_policy: PositionPolicy,
}

impl ActivationMatrix {
    pub fn hidden_dim(&self) -> usize {
        self.vectors.first().map(Vec::len).unwrap_or(0)
    }

    /// Checks the shape and finiteness invariants against a backend's
    /// layer count.
    pub fn validate(&self, n_layers: usize) -> Result<()> {
        if self.layer >= n_layers {
            return Err(Error::LayerOutOfRange {
                layer: self.layer,
                n_layers,
            });
        }
        if self.vectors.len() != self.prompt_ids.len() {
            return Err(Error::Alignment(format!(
                "{} activation rows for {} prompt ids",
                self.vectors.len(),
                self.prompt_ids.len()
            )));
        }
        let dim = self.hidden_dim();
        for (i, row) in self.vectors.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Alignment(format!(
                    "non-finite activation in row {i} at layer {}",
                    self.layer
                )));
            }
        }
        Ok(())
    }
}

/// Which attention relation a map describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttentionKind {
    /// Prompt tokens attending to prompt tokens.
    #[serde(rename = "self")]
    SelfAttention,
    /// Response tokens attending to prompt tokens.
    #[serde(rename = "cross")]
    CrossAttention,
}

/// Per-layer attention weights, max-pooled over heads.
///
/// Max-pooling keeps each entry inside [0, 1] but rows are no longer
/// stochastic; consumers must not assume they sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionMap {
    pub kind: AttentionKind,
    pub layer: usize,
    /// query-tokens x key-tokens.
    pub weights: Vec<Vec<f32>>,
    pub query_tokens: Vec<String>,
    pub key_tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionSign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionScope {
    AllPositions,
    GeneratedOnly,
}

/// A request to add or subtract a vector from the residual stream
/// entering one layer during generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionSpec {
    pub layer: usize,
    pub vector: Vec<f32>,
    pub sign: InjectionSign,
    pub scope: InjectionScope,
    pub coefficient: f32,
}

impl InjectionSpec {
    /// Plain injection at full strength over every position, matching
    /// how steering vectors are applied by default.
    pub fn new(layer: usize, vector: Vec<f32>, sign: InjectionSign) -> Self {
        Self {
            layer,
            vector,
            sign,
            scope: InjectionScope::AllPositions,
            coefficient: 1.0,
        }
    }

    pub(crate) fn signed_coefficient(&self) -> f32 {
        match self.sign {
            InjectionSign::Plus => self.coefficient,
            InjectionSign::Minus => -self.coefficient,
        }
    }
}

/// The model abstraction every experiment runs against.
///
/// Implementations take `&self`; anything stateful (a subprocess, a
/// loaded model) must synchronize internally. The pipeline serializes
/// calls per backend instance, so a `Mutex` is enough.
pub trait ModelBackend: Send {
    fn descriptor(&self) -> BackendDescriptor;

    /// Greedy/sampled continuation of `prompt`. Must be deterministic
    /// when `params.temperature == 0` or the backend itself is
    /// deterministic.
    fn generate(&self, prompt: &str, params: &DecodeParams) -> Result<String>;

    /// Residual-stream vectors for one prompt, one row per requested
    /// layer (in the order given), read at the last prompt position.
    fn capture_residual(&self, prompt: &str, layers: &[usize]) -> Result<Vec<Vec<f32>>>;

    /// Like [`ModelBackend::generate`], but with `spec` applied to the
    /// residual stream entering `spec.layer` on every in-scope forward
    /// position before later layers consume it.
    fn generate_with_injection(
        &self,
        prompt: &str,
        spec: &InjectionSpec,
        params: &DecodeParams,
    ) -> Result<String>;

    /// One map per layer of the requested kind. Backends without
    /// attention access return [`Error::AttentionUnavailable`].
    fn attention_maps(
        &self,
        prompt: &str,
        response: &str,
        kind: AttentionKind,
    ) -> Result<Vec<AttentionMap>>;
}

/// Assembles per-layer [`ActivationMatrix`] batches by capturing each
/// prompt once across all requested layers.
pub fn capture_batch(
    backend: &dyn ModelBackend,
    prompts: &[(String, String)],
    layers: &[usize],
) -> Result<Vec<ActivationMatrix>> {
    let mut per_layer: Vec<ActivationMatrix> = layers
        .iter()
        .map(|&layer| ActivationMatrix {
            layer,
            vectors: Vec::with_capacity(prompts.len()),
            prompt_ids: Vec::with_capacity(prompts.len()),
            position_policy: PositionPolicy::LastPromptToken,
        })
        .collect();
    for (id, prompt) in prompts {
        let rows = backend.capture_residual(prompt, layers)?;
        if rows.len() != layers.len() {
            return Err(Error::Alignment(format!(
                "backend returned {} rows for {} layers",
                rows.len(),
                layers.len()
            )));
        }
        for (matrix, row) in per_layer.iter_mut().zip(rows) {
            matrix.vectors.push(row);
            matrix.prompt_ids.push(id.clone());
        }
    }
    Ok(per_layer)
}
