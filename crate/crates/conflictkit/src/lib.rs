//! conflictkit builds context-memory knowledge conflicts for QA and code
//! generation tasks, categorizes model responses by the knowledge source they
//! rely on, trains per-layer probes over residual-stream activations, and
//! steers generations through activation-space interventions.
//!
//! The crate is organized around the experiment flow:
//!
//! * [`conflict`] loads corpora, elicits parametric answers, and renders
//!   conflicting contexts from fixed templates.
//! * [`pycode`] parses generated Python, applies deprecation/replacement
//!   mutations, and runs test suites in a subprocess sandbox.
//! * [`categorize`] classifies responses as Parametric, Conflicting, or Other
//!   and evaluates code correctness.
//! * [`backend`] abstracts model access (generation, residual capture,
//!   activation injection, attention maps) with toy, scripted, and adapter
//!   implementations selected through a registry.
//! * [`probe`] builds labeled activation datasets and trains linear/MLP
//!   probes per layer.
//! * [`steering`] derives steering vectors from activation means and a probe
//!   direction and measures steering success rates.
//! * [`pipeline`] wires the stages together behind a config file and emits
//!   tables and plots.

pub mod backend;
pub mod categorize;
pub mod config;
pub mod conflict;
pub mod error;
pub mod pipeline;
pub mod probe;
pub mod pycode;
pub mod steering;
pub mod text;

pub use config::Config;
pub use error::{Error, Result};
