//! On-disk activation dumps.
//!
//! A dump is a directory holding `manifest.json` plus one flat binary
//! file per captured layer, `layer_<l>.f32`: little-endian 32-bit
//! floats, row-major `[n_prompts x hidden_dim]`, rows in the manifest's
//! prompt-id order. The manifest records the backend name, layer list,
//! dimensions, position policy, and prompt ids, so a dump is
//! self-describing and reloadable without the backend that made it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{ActivationMatrix, PositionPolicy};

#[derive(Debug, Serialize, Deserialize)]
struct DumpManifest {
    backend: String,
    n_layers: usize,
    layers: Vec<usize>,
    hidden_dim: usize,
    n_prompts: usize,
    position_policy: PositionPolicy,
    prompt_ids: Vec<String>,
}

/// Writes `matrices` (one per layer, identical prompt order) under
/// `dir`, creating it if needed.
pub fn write_activation_dump(
    dir: &Path,
    backend_name: &str,
    matrices: &[ActivationMatrix],
) -> Result<()> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::EmptySet("no activation matrices to dump".into()))?;
    for m in matrices {
        if m.prompt_ids != first.prompt_ids {
            return Err(Error::Alignment(format!(
                "layer {} was captured over different prompts than layer {}",
                m.layer, first.layer
            )));
        }
        if m.hidden_dim() != first.hidden_dim() {
            return Err(Error::DimensionMismatch {
                expected: first.hidden_dim(),
                got: m.hidden_dim(),
            });
        }
    }
    std::fs::create_dir_all(dir)?;
    let manifest = DumpManifest {
        backend: backend_name.to_string(),
        n_layers: matrices.len(),
        layers: matrices.iter().map(|m| m.layer).collect(),
        hidden_dim: first.hidden_dim(),
        n_prompts: first.prompt_ids.len(),
        position_policy: first.position_policy,
        prompt_ids: first.prompt_ids.clone(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(dir.join("manifest.json"), manifest_json)?;
    for m in matrices {
        let mut bytes = Vec::with_capacity(m.vectors.len() * m.hidden_dim() * 4);
        for row in &m.vectors {
            for value in row {
                bytes.extend_from_slice(&value.to_le_bytes());
            }
        }
        std::fs::write(dir.join(format!("layer_{}.f32", m.layer)), bytes)?;
    }
    Ok(())
}

/// Reads a dump back; returns the backend name and one matrix per
/// layer listed in the manifest, in manifest order.
pub fn read_activation_dump(dir: &Path) -> Result<(String, Vec<ActivationMatrix>)> {
    let manifest_path = dir.join("manifest.json");
    let raw = std::fs::read_to_string(&manifest_path)?;
    let manifest: DumpManifest = serde_json::from_str(&raw)?;
    let mut matrices = Vec::with_capacity(manifest.layers.len());
    for &layer in &manifest.layers {
        let path = dir.join(format!("layer_{layer}.f32"));
        let bytes = std::fs::read(&path)?;
        let expected = manifest.n_prompts * manifest.hidden_dim * 4;
        if bytes.len() != expected {
            return Err(Error::Format {
                path: path.display().to_string(),
                line: 0,
                msg: format!("expected {expected} bytes, found {}", bytes.len()),
            });
        }
        let mut values = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
        let vectors: Vec<Vec<f32>> = (0..manifest.n_prompts)
            .map(|_| (0..manifest.hidden_dim).map(|_| values.next().unwrap()).collect())
            .collect();
        matrices.push(ActivationMatrix {
            layer,
            vectors,
            prompt_ids: manifest.prompt_ids.clone(),
            position_policy: manifest.position_policy,
        });
    }
    Ok((manifest.backend, matrices))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_matrix(layer: usize) -> ActivationMatrix {
        ActivationMatrix {
            layer,
            vectors: vec![vec![1.0, -2.5, 0.25], vec![0.0, 3.5, -0.125]],
            prompt_ids: vec!["a".into(), "b".into()],
            position_policy: PositionPolicy::LastPromptToken,
        }
    }

    #[test]
    fn round_trips_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let mats = vec![sample_matrix(0), sample_matrix(2)];
        write_activation_dump(dir.path(), "toy", &mats).unwrap();
        let (backend, loaded) = read_activation_dump(dir.path()).unwrap();
        assert_eq!(backend, "toy");
        assert_eq!(loaded, mats);
    }

    #[test]
    fn truncated_layer_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_activation_dump(dir.path(), "toy", &[sample_matrix(1)]).unwrap();
        let path = dir.path().join("layer_1.f32");
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(
            read_activation_dump(dir.path()),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn mismatched_prompt_sets_cannot_be_dumped() {
        let dir = tempfile::tempdir().unwrap();
        let mut other = sample_matrix(1);
        other.prompt_ids = vec!["a".into(), "c".into()];
        let err = write_activation_dump(dir.path(), "toy", &[sample_matrix(0), other]);
        assert!(matches!(err, Err(Error::Alignment(_))));
    }
}
