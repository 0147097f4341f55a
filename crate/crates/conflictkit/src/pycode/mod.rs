//! Static analysis, mutation, and sandboxed execution of Python snippets.
//!
//! Everything here treats the snippet as untrusted text. Analysis and
//! mutation are pure (AST in, string out); only [`sandbox::run_tests`]
//! actually executes anything, and it does so in a subprocess with
//! resource limits and an import guard.

mod facts;
mod mutate;
pub mod sandbox;

pub use facts::{extract_facts, CodeFacts};
pub use mutate::{mutate_deprecate, mutate_replace, TargetKind};
pub use sandbox::{run_tests, SandboxLimits, TestOutcome};
