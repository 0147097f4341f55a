//! Name-keyed construction of backends from a run config.
//!
//! The pipeline and CLI never commit to a concrete backend type; they
//! ask the registry for whatever `backend.kind` names. New backends
//! (or test doubles) register a factory under a name and immediately
//! work everywhere a config can reach.

use std::collections::BTreeMap;

use crate::config::Config;
use crate::error::{Error, Result};

use super::toy::DEFAULT_TOY_VOCAB;
use super::{make_toy_backend, AdapterBackend, ModelBackend, ScriptedBackend};

pub type BackendFactory = fn(&Config) -> Result<Box<dyn ModelBackend>>;

pub struct BackendRegistry {
    factories: BTreeMap<String, BackendFactory>,
}

impl BackendRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// A registry with the three bundled backends: `toy`, `scripted`,
    /// and `adapter`.
    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register("toy", build_toy);
        registry.register("scripted", build_scripted);
        registry.register("adapter", build_adapter);
        registry
    }

    pub fn register(&mut self, name: &str, factory: BackendFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(&self, name: &str, config: &Config) -> Result<Box<dyn ModelBackend>> {
        match self.factories.get(name) {
            Some(factory) => factory(config),
            None => Err(Error::UnknownBackend(format!(
                "{name} (known backends: {})",
                self.names().join(", ")
            ))),
        }
    }
}

impl Default for BackendRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

fn build_toy(config: &Config) -> Result<Box<dyn ModelBackend>> {
    let n_layers = config.get_usize("toy.n_layers", 4)?;
    let hidden_dim = config.get_usize("toy.hidden_dim", 16)?;
    let seed = config.get_u64("seed", 0)?;
    let plant = config.get_bool("toy.plant_marker", true)?;
    let vocab = config.get_str_list("toy.vocab", DEFAULT_TOY_VOCAB);
    Ok(Box::new(make_toy_backend(
        n_layers, hidden_dim, &vocab, seed, plant,
    )?))
}

fn build_scripted(config: &Config) -> Result<Box<dyn ModelBackend>> {
    let path = config.require("scripted.table")?;
    Ok(Box::new(ScriptedBackend::from_json_file(
        std::path::Path::new(path),
    )?))
}

fn build_adapter(config: &Config) -> Result<Box<dyn ModelBackend>> {
    let cmd = config.require("adapter.cmd")?;
    let parts: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
    if parts.is_empty() {
        return Err(Error::Config("adapter.cmd is empty".into()));
    }
    Ok(Box::new(AdapterBackend::launch(&parts)?))
}
