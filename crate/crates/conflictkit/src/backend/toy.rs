//! A tiny deterministic transformer with fully known internals.
//!
//! The toy backend exists so that claims about activations (probe
//! accuracy, steering flips, injection arithmetic) can be checked
//! against ground truth instead of against another model. Its design
//! trades realism for analyzability:
//!
//! * Tokens are whitespace-split words with surrounding ASCII
//!   punctuation stripped. Each token's embedding is a seeded hash, so
//!   the vocabulary never needs to be enumerated up front.
//! * The last three coordinates of the hidden state are reserved and
//!   pass through every block unchanged. Embeddings leave them at zero.
//! * Blocks apply causal dot-product attention over the remaining
//!   coordinates with a small mixing rate, so states stay bounded and
//!   layer-distinct but never touch the reserved band.
//! * When the backend is built with a planted marker, block 0 writes
//!   +1.0 into the last coordinate at every position that can see a
//!   [`CONFLICT_SENTINEL`] token. Conflict presence is then linearly
//!   separable at every layer past the embeddings, with a margin of
//!   exactly 1.0 along that coordinate, and generation reads the same
//!   coordinate to decide whether to echo the context or answer from
//!   its "parametric" hash. Adding or subtracting a vector with enough
//!   mass on the marker coordinate therefore flips the behavior, which
//!   is precisely the mechanism steering experiments rely on.
//!
//! Generation emits a short deterministic answer: either the text
//! following the sentinel on its line (context-copying mode) or a
//! pseudo-random content word chosen by hashing the final prompt line
//! (parametric mode), so the parametric answer for a bare question and
//! for a context-plus-question prompt agree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::conflict::DecodeParams;
use crate::error::{Error, Result};

use super::{
    AttentionKind, AttentionMap, BackendDescriptor, InjectionSpec, ModelBackend,
};

/// Marker token test fixtures insert into conflict prompts. The glyphs
/// are outside ASCII so punctuation stripping leaves it intact.
pub const CONFLICT_SENTINEL: &str = "⟂CONFLICT⟂";

/// Content words the parametric answer is drawn from. Deliberately
/// disjoint from the entity names used in the bundled datasets so a
/// hash-picked answer never collides with a context payload.
pub const DEFAULT_TOY_VOCAB: &[&str] = &[
    "harbor", "meadow", "lantern", "orchid", "basalt", "juniper", "ember", "quartz", "willow",
    "falcon", "ginger", "cobalt", "marble", "saffron", "tundra", "velvet", "walnut", "zephyr",
    "indigo", "maple", "onyx", "prairie", "sable", "thicket",
];

const RESERVED_COORDS: usize = 3;
const MIX_RATE: f32 = 0.05;

pub struct ToyBackend {
    n_layers: usize,
    hidden_dim: usize,
    vocab: Vec<String>,
    seed: u64,
    plant_marker: bool,
    /// Per-layer content-mixing matrices, row-major d_content squared.
    mix: Vec<Vec<f32>>,
}

/// Builds a toy backend with weights derived deterministically from
/// `seed`. `hidden_dim` must be at least 4: three reserved coordinates
/// plus at least one content coordinate.
pub fn make_toy_backend(
    n_layers: usize,
    hidden_dim: usize,
    vocab: &[String],
    seed: u64,
    plant_conflict_marker: bool,
) -> Result<ToyBackend> {
    if n_layers < 1 {
        return Err(Error::Config("toy backend needs at least one layer".into()));
    }
    if hidden_dim < RESERVED_COORDS + 1 {
        return Err(Error::Config(format!(
            "toy backend needs hidden_dim >= {}, got {hidden_dim}",
            RESERVED_COORDS + 1
        )));
    }
    let d_content = hidden_dim - RESERVED_COORDS;
    let scale = (3.0 / d_content as f64).sqrt() as f32;
    let mix = (0..n_layers)
        .map(|l| {
            let mut rng = seed_rng(seed, 0x100 + l as u64);
            (0..d_content * d_content)
                .map(|_| rng.gen_range(-scale..scale))
                .collect()
        })
        .collect();
    Ok(ToyBackend {
        n_layers,
        hidden_dim,
        vocab: vocab.to_vec(),
        seed,
        plant_marker: plant_conflict_marker,
        mix,
    })
}

impl ToyBackend {
    /// Residual capture with an injection active, the toy-only probe
    /// point behind the injection-linearity property: the vector read
    /// at `spec.layer` is exactly the baseline plus the signed,
    /// scaled injection vector.
    pub fn capture_with_injection(
        &self,
        prompt: &str,
        layers: &[usize],
        spec: &InjectionSpec,
    ) -> Result<Vec<Vec<f32>>> {
        self.check_injection(spec)?;
        self.capture(prompt, layers, Some(spec))
    }

    fn capture(
        &self,
        prompt: &str,
        layers: &[usize],
        spec: Option<&InjectionSpec>,
    ) -> Result<Vec<Vec<f32>>> {
        for &layer in layers {
            if layer >= self.n_layers {
                return Err(Error::LayerOutOfRange {
                    layer,
                    n_layers: self.n_layers,
                });
            }
        }
        let fwd = self.forward(prompt, spec)?;
        let last = fwd.states[0].len() - 1;
        Ok(layers
            .iter()
            .map(|&layer| fwd.states[layer][last].clone())
            .collect())
    }

    /// Runs the stack, returning the stream entering each block
    /// (`states[0]` = embeddings) plus the final stream `states[n]`.
    fn forward(&self, prompt: &str, spec: Option<&InjectionSpec>) -> Result<Forward> {
        let tokens = tokenize(prompt);
        if tokens.is_empty() {
            return Err(Error::BackendFailure(
                "toy backend cannot run an empty prompt".into(),
            ));
        }
        let d = self.hidden_dim;
        let d_content = d - RESERVED_COORDS;
        let mut states = Vec::with_capacity(self.n_layers + 1);
        let mut current: Vec<Vec<f32>> = tokens.iter().map(|t| self.embed(t)).collect();
        self.maybe_inject(&mut current, 0, spec);
        states.push(current.clone());

        for layer in 0..self.n_layers {
            let w = &self.mix[layer];
            let n = current.len();
            let mut next = current.clone();
            // Rotate every position's content once, then mix causally.
            let rotated: Vec<Vec<f32>> = current
                .iter()
                .map(|x| {
                    (0..d_content)
                        .map(|r| {
                            (0..d_content)
                                .map(|c| w[r * d_content + c] * x[c])
                                .sum::<f32>()
                        })
                        .collect()
                })
                .collect();
            let inv_sqrt = 1.0 / (d_content as f32).sqrt();
            for i in 0..n {
                let scores: Vec<f32> = (0..=i)
                    .map(|j| {
                        let dot: f32 = (0..d_content)
                            .map(|c| current[i][c] * current[j][c])
                            .sum();
                        dot * inv_sqrt
                    })
                    .collect();
                let attn = softmax(&scores);
                for c in 0..d_content {
                    let mixed: f32 = attn
                        .iter()
                        .zip(0..=i)
                        .map(|(a, j)| a * rotated[j][c])
                        .sum();
                    next[i][c] += MIX_RATE * mixed;
                }
            }
            if layer == 0 && self.plant_marker {
                let mut seen = false;
                for (i, token) in tokens.iter().enumerate() {
                    seen = seen || token == CONFLICT_SENTINEL;
                    if seen {
                        next[i][d - 1] += 1.0;
                    }
                }
            }
            self.maybe_inject(&mut next, layer + 1, spec);
            states.push(next.clone());
            current = next;
        }
        Ok(Forward { tokens, states })
    }

    fn maybe_inject(&self, stream: &mut [Vec<f32>], entering: usize, spec: Option<&InjectionSpec>) {
        let Some(spec) = spec else { return };
        if spec.layer != entering {
            return;
        }
        let coef = spec.signed_coefficient();
        let last = stream.len() - 1;
        for (pos, state) in stream.iter_mut().enumerate() {
            // The toy emits from the last prompt position, so that
            // position is the generated scope.
            let in_scope = match spec.scope {
                super::InjectionScope::AllPositions => true,
                super::InjectionScope::GeneratedOnly => pos == last,
            };
            if in_scope {
                for (s, v) in state.iter_mut().zip(&spec.vector) {
                    *s += coef * v;
                }
            }
        }
    }

    fn check_injection(&self, spec: &InjectionSpec) -> Result<()> {
        if spec.layer >= self.n_layers {
            return Err(Error::LayerOutOfRange {
                layer: spec.layer,
                n_layers: self.n_layers,
            });
        }
        if spec.vector.len() != self.hidden_dim {
            return Err(Error::DimensionMismatch {
                expected: self.hidden_dim,
                got: spec.vector.len(),
            });
        }
        Ok(())
    }

    fn embed(&self, token: &str) -> Vec<f32> {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(token.as_bytes());
        let digest = hasher.finalize();
        let token_seed = u64::from_le_bytes(digest[..8].try_into().expect("8-byte slice"));
        let mut rng = ChaCha8Rng::seed_from_u64(token_seed);
        let d_content = self.hidden_dim - RESERVED_COORDS;
        let mut v = vec![0.0f32; self.hidden_dim];
        for coord in v.iter_mut().take(d_content) {
            *coord = rng.gen_range(-0.5f32..0.5f32);
        }
        v
    }

    fn decode(&self, prompt: &str, fwd: &Forward, params: &DecodeParams) -> String {
        let d = self.hidden_dim;
        let last = fwd.states[self.n_layers].len() - 1;
        let marker = fwd.states[self.n_layers][last][d - 1];
        let budget = params.max_new_tokens.max(1);
        if marker > 0.5 {
            let register = copy_register(prompt);
            let words: Vec<&str> = register.split_whitespace().take(budget).collect();
            if words.is_empty() {
                return CONFLICT_SENTINEL.to_string();
            }
            return words.join(" ");
        }
        self.parametric_answer(prompt)
    }

    /// Hash-picks a content word from the vocabulary (or, with an empty
    /// vocabulary, from the question itself), keyed by the final
    /// non-empty prompt line. A bare question and a context-question
    /// prompt that end in the same line thus get the same answer.
    fn parametric_answer(&self, prompt: &str) -> String {
        let line = prompt
            .lines()
            .rev()
            .find(|l| !l.trim().is_empty())
            .unwrap_or("");
        let line_tokens = tokenize(line);
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        for token in &line_tokens {
            hasher.update(token.as_bytes());
            hasher.update([0x1f]);
        }
        let digest = hasher.finalize();
        let pick = u64::from_le_bytes(digest[..8].try_into().expect("8-byte slice")) as usize;
        let candidates: Vec<String> = if self.vocab.is_empty() {
            let content: Vec<String> = line_tokens.iter().filter(|t| t.len() >= 3).cloned().collect();
            if content.is_empty() {
                line_tokens.clone()
            } else {
                content
            }
        } else {
            let content: Vec<String> = self.vocab.iter().filter(|t| t.len() >= 3).cloned().collect();
            if content.is_empty() {
                self.vocab.clone()
            } else {
                content
            }
        };
        if candidates.is_empty() {
            return CONFLICT_SENTINEL.to_string();
        }
        candidates[pick % candidates.len()].clone()
    }

    fn head_signs(&self, layer: usize, head: usize) -> Vec<f32> {
        let mut rng = seed_rng(self.seed, 0x2000 + (layer * 2 + head) as u64);
        (0..self.hidden_dim)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect()
    }
}

impl ModelBackend for ToyBackend {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            name: "toy".into(),
            n_layers: self.n_layers,
            hidden_dim: self.hidden_dim,
            deterministic: true,
        }
    }

    fn generate(&self, prompt: &str, params: &DecodeParams) -> Result<String> {
        let fwd = self.forward(prompt, None)?;
        Ok(self.decode(prompt, &fwd, params))
    }

    fn capture_residual(&self, prompt: &str, layers: &[usize]) -> Result<Vec<Vec<f32>>> {
        self.capture(prompt, layers, None)
    }

    fn generate_with_injection(
        &self,
        prompt: &str,
        spec: &InjectionSpec,
        params: &DecodeParams,
    ) -> Result<String> {
        self.check_injection(spec)?;
        let fwd = self.forward(prompt, Some(spec))?;
        Ok(self.decode(prompt, &fwd, params))
    }

    fn attention_maps(
        &self,
        prompt: &str,
        response: &str,
        kind: AttentionKind,
    ) -> Result<Vec<AttentionMap>> {
        let fwd = self.forward(prompt, None)?;
        let prompt_tokens = fwd.tokens.clone();
        let response_tokens = tokenize(response);
        let mut maps = Vec::with_capacity(self.n_layers);
        for layer in 0..self.n_layers {
            let keys = &fwd.states[layer];
            let (queries, causal, query_tokens): (Vec<Vec<f32>>, bool, Vec<String>) = match kind {
                AttentionKind::SelfAttention => (keys.clone(), true, prompt_tokens.clone()),
                AttentionKind::CrossAttention => (
                    response_tokens.iter().map(|t| self.embed(t)).collect(),
                    false,
                    response_tokens.clone(),
                ),
            };
            let mut pooled = vec![vec![0.0f32; keys.len()]; queries.len()];
            for head in 0..2 {
                let signs = self.head_signs(layer, head);
                let inv_sqrt = 1.0 / (self.hidden_dim as f32).sqrt();
                for (qi, q) in queries.iter().enumerate() {
                    let limit = if causal { qi + 1 } else { keys.len() };
                    let scores: Vec<f32> = keys[..limit]
                        .iter()
                        .map(|k| {
                            q.iter()
                                .zip(k)
                                .zip(&signs)
                                .map(|((a, b), s)| a * s * b)
                                .sum::<f32>()
                                * inv_sqrt
                        })
                        .collect();
                    for (ki, a) in softmax(&scores).into_iter().enumerate() {
                        pooled[qi][ki] = pooled[qi][ki].max(a);
                    }
                }
            }
            maps.push(AttentionMap {
                kind,
                layer,
                weights: pooled,
                query_tokens: query_tokens.clone(),
                key_tokens: prompt_tokens.clone(),
            });
        }
        Ok(maps)
    }
}

struct Forward {
    tokens: Vec<String>,
    /// `states[l]` is the stream entering block `l`; `states[n_layers]`
    /// is the final stream generation reads from.
    states: Vec<Vec<Vec<f32>>>,
}

/// Whitespace tokens with surrounding ASCII punctuation stripped; a
/// token that is nothing but punctuation is kept raw.
pub(crate) fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|word| {
            let trimmed = word.trim_matches(|c: char| c.is_ascii_punctuation());
            if trimmed.is_empty() {
                word.to_string()
            } else {
                trimmed.to_string()
            }
        })
        .collect()
}

/// The text after the first sentinel on its own line, which is what
/// context-copying generation echoes.
fn copy_register(prompt: &str) -> String {
    match prompt.find(CONFLICT_SENTINEL) {
        Some(at) => {
            let rest = &prompt[at + CONFLICT_SENTINEL.len()..];
            let line_end = rest.find('\n').unwrap_or(rest.len());
            rest[..line_end].trim().to_string()
        }
        None => String::new(),
    }
}

fn softmax(scores: &[f32]) -> Vec<f32> {
    if scores.is_empty() {
        return Vec::new();
    }
    let max = scores.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f32> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f32 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn seed_rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{InjectionScope, InjectionSign};

    fn vocab() -> Vec<String> {
        DEFAULT_TOY_VOCAB.iter().map(|s| s.to_string()).collect()
    }

    fn toy() -> ToyBackend {
        make_toy_backend(4, 16, &vocab(), 7, true).unwrap()
    }

    #[test]
    fn generation_is_deterministic() {
        let backend = toy();
        let params = DecodeParams::default();
        let a = backend.generate("What is the capital of France?", &params).unwrap();
        let b = backend.generate("What is the capital of France?", &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parametric_answer_ignores_added_context() {
        let backend = toy();
        let params = DecodeParams::default();
        let bare = backend.generate("What is the capital of France?", &params).unwrap();
        let with_context = backend
            .generate("Some harmless sentence.\nWhat is the capital of France?", &params)
            .unwrap();
        assert_eq!(bare, with_context);
    }

    #[test]
    fn sentinel_flips_generation_to_context_copy() {
        let backend = toy();
        let params = DecodeParams::default();
        let prompt = format!("{CONFLICT_SENTINEL} Villagetown is the capital.\nWhat is the capital of France?");
        let out = backend.generate(&prompt, &params).unwrap();
        assert_eq!(out, "Villagetown is the capital.");
    }

    #[test]
    fn marker_margin_is_exactly_one_at_every_later_layer() {
        let backend = toy();
        let with = format!("{CONFLICT_SENTINEL} Paris rules.\nWhat is the capital?");
        let without = "Paris rules.\nWhat is the capital?";
        for layer in 1..4 {
            let a = backend.capture_residual(&with, &[layer]).unwrap();
            let b = backend.capture_residual(without, &[layer]).unwrap();
            let d = 16;
            assert_eq!(a[0][d - 1] - b[0][d - 1], 1.0);
        }
    }

    #[test]
    fn layer_zero_reserved_band_is_empty() {
        let backend = toy();
        let rows = backend
            .capture_residual(&format!("{CONFLICT_SENTINEL} x y\nq"), &[0])
            .unwrap();
        assert_eq!(&rows[0][13..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn injection_is_exact_at_the_injected_layer() {
        let backend = toy();
        let prompt = "What is the capital of France?";
        let base = backend.capture_residual(prompt, &[2]).unwrap();
        let mut vector = vec![0.0f32; 16];
        vector[3] = 1.5;
        vector[15] = -2.0;
        let spec = InjectionSpec {
            layer: 2,
            vector: vector.clone(),
            sign: InjectionSign::Minus,
            scope: InjectionScope::AllPositions,
            coefficient: 0.5,
        };
        let injected = backend.capture_with_injection(prompt, &[2], &spec).unwrap();
        for c in 0..16 {
            let expected = base[0][c] - 0.5 * vector[c];
            assert!((injected[0][c] - expected).abs() <= 1e-6 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn minus_marker_injection_restores_parametric_answer() {
        let backend = toy();
        let params = DecodeParams::default();
        let bare = backend.generate("What is the capital of France?", &params).unwrap();
        let prompt = format!("{CONFLICT_SENTINEL} Villagetown lore.\nWhat is the capital of France?");
        let mut vector = vec![0.0f32; 16];
        vector[15] = 1.0;
        let spec = InjectionSpec::new(1, vector, InjectionSign::Minus);
        let steered = backend.generate_with_injection(&prompt, &spec, &params).unwrap();
        assert_eq!(steered, bare);
    }

    #[test]
    fn bad_injections_are_rejected() {
        let backend = toy();
        let params = DecodeParams::default();
        let short = InjectionSpec::new(1, vec![0.0; 3], InjectionSign::Plus);
        assert!(matches!(
            backend.generate_with_injection("q", &short, &params),
            Err(Error::DimensionMismatch { expected: 16, got: 3 })
        ));
        let deep = InjectionSpec::new(9, vec![0.0; 16], InjectionSign::Plus);
        assert!(matches!(
            backend.generate_with_injection("q", &deep, &params),
            Err(Error::LayerOutOfRange { .. })
        ));
    }

    #[test]
    fn attention_maps_have_expected_shape_and_range() {
        let backend = toy();
        let maps = backend
            .attention_maps("one two three", "four five", AttentionKind::SelfAttention)
            .unwrap();
        assert_eq!(maps.len(), 4);
        for map in &maps {
            assert_eq!(map.weights.len(), 3);
            for row in &map.weights {
                assert_eq!(row.len(), 3);
                for &w in row {
                    assert!((0.0..=1.0).contains(&w));
                }
            }
        }
        let cross = backend
            .attention_maps("one two three", "four five", AttentionKind::CrossAttention)
            .unwrap();
        assert_eq!(cross[0].weights.len(), 2);
        assert_eq!(cross[0].weights[0].len(), 3);
    }

    #[test]
    fn empty_prompt_is_a_backend_failure() {
        let backend = toy();
        assert!(matches!(
            backend.generate("   ", &DecodeParams::default()),
            Err(Error::BackendFailure(_))
        ));
    }
}
