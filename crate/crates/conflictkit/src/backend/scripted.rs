//! A lookup-table backend for unit tests.
//!
//! Maps exact prompt strings to canned responses and nothing more: no
//! activations, no injection, no attention. Tests that only exercise
//! categorization or steering bookkeeping use it to feed known
//! responses through real code paths.

use std::collections::BTreeMap;
use std::path::Path;

use crate::conflict::DecodeParams;
use crate::error::{Error, Result};

use super::{AttentionKind, AttentionMap, BackendDescriptor, InjectionSpec, ModelBackend};

#[derive(Debug, Default)]
pub struct ScriptedBackend {
    table: BTreeMap<String, String>,
}

impl ScriptedBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a JSON object mapping prompt strings to response strings.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        let table: BTreeMap<String, String> = serde_json::from_str(&raw)?;
        Ok(Self { table })
    }

    pub fn insert(&mut self, prompt: impl Into<String>, response: impl Into<String>) {
        self.table.insert(prompt.into(), response.into());
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl ModelBackend for ScriptedBackend {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            name: "scripted".into(),
            n_layers: 1,
            hidden_dim: 1,
            deterministic: true,
        }
    }

    fn generate(&self, prompt: &str, _params: &DecodeParams) -> Result<String> {
        self.table.get(prompt).cloned().ok_or_else(|| {
            let head: String = prompt.chars().take(80).collect();
            Error::BackendFailure(format!("scripted backend has no entry for prompt {head:?}"))
        })
    }

    fn capture_residual(&self, _prompt: &str, _layers: &[usize]) -> Result<Vec<Vec<f32>>> {
        Err(Error::BackendFailure(
            "scripted backend exposes no activations".into(),
        ))
    }

    fn generate_with_injection(
        &self,
        _prompt: &str,
        _spec: &InjectionSpec,
        _params: &DecodeParams,
    ) -> Result<String> {
        Err(Error::BackendFailure(
            "scripted backend cannot apply injections".into(),
        ))
    }

    fn attention_maps(
        &self,
        _prompt: &str,
        _response: &str,
        _kind: AttentionKind,
    ) -> Result<Vec<AttentionMap>> {
        Err(Error::AttentionUnavailable(
            "scripted backend records no attention".into(),
        ))
    }
}
