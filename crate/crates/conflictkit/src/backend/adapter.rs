//! Subprocess adapter for real models.
//!
//! The adapter process is any program that answers one JSON object per
//! line on stdout for each JSON request line on stdin. This keeps heavy
//! model runtimes (Python, GPU stacks) out of this crate's process
//! while still exposing residual-stream read and write access.
//!
//! Requests, by `op`:
//!
//! ```text
//! {"op":"describe"}
//!   -> {"name":"...","n_layers":N,"hidden_dim":D,"deterministic":true}
//! {"op":"generate","prompt":P,"params":{...}}
//!   -> {"text":"..."}
//! {"op":"capture","prompt":P,"layers":[l,...]}
//!   -> {"rows":[[...],...]}           one row per requested layer
//! {"op":"generate_injected","prompt":P,"params":{...},"spec":{...}}
//!   -> {"text":"..."}
//! {"op":"attention","prompt":P,"response":R,"kind":"self"|"cross"}
//!   -> {"maps":[{"kind":...,"layer":...,"weights":[[...]],
//!                "query_tokens":[...],"key_tokens":[...]}]}
//! {"op":"shutdown"}
//!   -> process exits
//! ```
//!
//! Any reply containing an `"error"` key is surfaced as
//! [`Error::Adapter`]. The `adapters/` directory in the repository
//! root contains a stdlib-only mock and a TransformerLens reference
//! implementation of this protocol.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::{json, Value};

use crate::conflict::DecodeParams;
use crate::error::{Error, Result};

use super::{AttentionKind, AttentionMap, BackendDescriptor, InjectionSpec, ModelBackend};

pub struct AdapterBackend {
    io: Mutex<AdapterIo>,
    descriptor: BackendDescriptor,
}

struct AdapterIo {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl AdapterBackend {
    /// Launches `cmd` (program plus arguments) and performs the
    /// `describe` handshake.
    pub fn launch(cmd: &[String]) -> Result<Self> {
        let (program, args) = cmd
            .split_first()
            .ok_or_else(|| Error::Config("adapter command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::Adapter(format!("cannot launch adapter {program:?}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut io = AdapterIo {
            child,
            stdin,
            stdout,
        };
        let reply = io.call(json!({"op": "describe"}))?;
        let descriptor: BackendDescriptor = serde_json::from_value(reply)
            .map_err(|e| Error::Adapter(format!("bad describe reply: {e}")))?;
        Ok(Self {
            io: Mutex::new(io),
            descriptor,
        })
    }

    fn call(&self, request: Value) -> Result<Value> {
        let mut io = self
            .io
            .lock()
            .map_err(|_| Error::Adapter("adapter state poisoned by an earlier panic".into()))?;
        io.call(request)
    }
}

impl AdapterIo {
    fn call(&mut self, request: Value) -> Result<Value> {
        let mut line = serde_json::to_string(&request)?;
        line.push('\n');
        self.stdin
            .write_all(line.as_bytes())
            .and_then(|()| self.stdin.flush())
            .map_err(|e| Error::Adapter(format!("adapter write failed: {e}")))?;
        let mut reply = String::new();
        let n = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| Error::Adapter(format!("adapter read failed: {e}")))?;
        if n == 0 {
            return Err(Error::Adapter("adapter closed its output stream".into()));
        }
        let value: Value = serde_json::from_str(reply.trim_end())
            .map_err(|e| Error::Adapter(format!("adapter sent invalid JSON: {e}")))?;
        if let Some(message) = value.get("error").and_then(Value::as_str) {
            return Err(Error::Adapter(message.to_string()));
        }
        Ok(value)
    }
}

impl Drop for AdapterBackend {
    fn drop(&mut self) {
        if let Ok(mut io) = self.io.lock() {
            let _ = io.call(json!({"op": "shutdown"}));
            let deadline = Instant::now() + Duration::from_secs(2);
            loop {
                match io.child.try_wait() {
                    Ok(Some(_)) => break,
                    Ok(None) if Instant::now() < deadline => {
                        std::thread::sleep(Duration::from_millis(20));
                    }
                    _ => {
                        let _ = io.child.kill();
                        let _ = io.child.wait();
                        break;
                    }
                }
            }
        }
    }
}

#[derive(Deserialize)]
struct TextReply {
    text: String,
}

#[derive(Deserialize)]
struct RowsReply {
    rows: Vec<Vec<f32>>,
}

#[derive(Deserialize)]
struct MapsReply {
    maps: Vec<AttentionMap>,
}

impl ModelBackend for AdapterBackend {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor.clone()
    }

    fn generate(&self, prompt: &str, params: &DecodeParams) -> Result<String> {
        let reply = self.call(json!({
            "op": "generate",
            "prompt": prompt,
            "params": params,
        }))?;
        let parsed: TextReply = serde_json::from_value(reply)
            .map_err(|e| Error::Adapter(format!("bad generate reply: {e}")))?;
        Ok(parsed.text)
    }

    fn capture_residual(&self, prompt: &str, layers: &[usize]) -> Result<Vec<Vec<f32>>> {
        for &layer in layers {
            if layer >= self.descriptor.n_layers {
                return Err(Error::LayerOutOfRange {
                    layer,
                    n_layers: self.descriptor.n_layers,
                });
            }
        }
        let reply = self.call(json!({
            "op": "capture",
            "prompt": prompt,
            "layers": layers,
        }))?;
        let parsed: RowsReply = serde_json::from_value(reply)
            .map_err(|e| Error::Adapter(format!("bad capture reply: {e}")))?;
        if parsed.rows.len() != layers.len() {
            return Err(Error::Adapter(format!(
                "adapter returned {} rows for {} layers",
                parsed.rows.len(),
                layers.len()
            )));
        }
        for row in &parsed.rows {
            if row.len() != self.descriptor.hidden_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.descriptor.hidden_dim,
                    got: row.len(),
                });
            }
        }
        Ok(parsed.rows)
    }

    fn generate_with_injection(
        &self,
        prompt: &str,
        spec: &InjectionSpec,
        params: &DecodeParams,
    ) -> Result<String> {
        if spec.layer >= self.descriptor.n_layers {
            return Err(Error::LayerOutOfRange {
                layer: spec.layer,
                n_layers: self.descriptor.n_layers,
            });
        }
        if spec.vector.len() != self.descriptor.hidden_dim {
            return Err(Error::DimensionMismatch {
                expected: self.descriptor.hidden_dim,
                got: spec.vector.len(),
            });
        }
        let reply = self.call(json!({
            "op": "generate_injected",
            "prompt": prompt,
            "params": params,
            "spec": spec,
        }))?;
        let parsed: TextReply = serde_json::from_value(reply)
            .map_err(|e| Error::Adapter(format!("bad generate_injected reply: {e}")))?;
        Ok(parsed.text)
    }

    fn attention_maps(
        &self,
        prompt: &str,
        response: &str,
        kind: AttentionKind,
    ) -> Result<Vec<AttentionMap>> {
        let reply = self.call(json!({
            "op": "attention",
            "prompt": prompt,
            "response": response,
            "kind": kind,
        }))?;
        let parsed: MapsReply = serde_json::from_value(reply)
            .map_err(|e| Error::Adapter(format!("bad attention reply: {e}")))?;
        Ok(parsed.maps)
    }
}
