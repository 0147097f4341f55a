//! End-to-end experiment orchestration.
//!
//! A run walks the stages elicit, conflict, generate, categorize,
//! activations, probe, steer, report, persisting every artifact under
//! one output directory and recording completion in a manifest keyed by
//! the config's content hash. Rerunning with an unchanged config is a
//! no-op per stage unless forced; changing the config invalidates all
//! completed stages. Attention capture is a stage too but only runs
//! when asked for (config `attn.enabled` or the `attn` subcommand).

mod plot;
mod stages;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::backend::{BackendRegistry, InjectionScope, ModelBackend};
use crate::conflict::{CodeConflictKind, DecodeParams, IntroKind, StatementKind, TaskKind};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::probe::{LabelScheme, SweepConfig, TrainSettings};
use crate::pycode::SandboxLimits;

/// Pipeline stages in run order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Elicit,
    Conflict,
    Generate,
    Categorize,
    Activations,
    Probe,
    Steer,
    Attn,
    Report,
}

impl Stage {
    /// Default `run` order. Attn sits before report but is skipped
    /// unless enabled.
    pub const RUN_ORDER: [Stage; 9] = [
        Stage::Elicit,
        Stage::Conflict,
        Stage::Generate,
        Stage::Categorize,
        Stage::Activations,
        Stage::Probe,
        Stage::Steer,
        Stage::Attn,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Elicit => "elicit",
            Stage::Conflict => "conflict",
            Stage::Generate => "generate",
            Stage::Categorize => "categorize",
            Stage::Activations => "activations",
            Stage::Probe => "probe",
            Stage::Steer => "steer",
            Stage::Attn => "attn",
            Stage::Report => "report",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::RUN_ORDER
            .into_iter()
            .find(|stage| stage.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage `{s}`")))
    }

    /// Stages that must have completed first.
    pub fn deps(self) -> &'static [Stage] {
        match self {
            Stage::Elicit => &[],
            Stage::Conflict => &[Stage::Elicit],
            Stage::Generate => &[Stage::Conflict],
            Stage::Categorize => &[Stage::Generate],
            Stage::Activations => &[Stage::Conflict],
            Stage::Probe => &[Stage::Categorize, Stage::Activations],
            Stage::Steer => &[Stage::Probe],
            Stage::Attn => &[Stage::Generate],
            Stage::Report => &[Stage::Categorize, Stage::Probe],
        }
    }

    fn needs_backend(self) -> bool {
        matches!(
            self,
            Stage::Elicit | Stage::Generate | Stage::Activations | Stage::Steer | Stage::Attn
        )
    }
}

/// Everything a run needs, resolved from the flat config with defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: TaskKind,
    pub data_path: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub statement_kinds: Vec<StatementKind>,
    pub code_kinds: Vec<CodeConflictKind>,
    pub intro_kinds: Vec<IntroKind>,
    pub n_obs: usize,
    pub pairs_per_obs: usize,
    pub decode: DecodeParams,
    /// Prefix conflict contexts with the toy backend's sentinel token so
    /// its planted marker fires on conflict prompts.
    pub plant_sentinel: bool,
    /// Layers to capture and probe; empty means every layer.
    pub layers: Vec<usize>,
    pub scheme: LabelScheme,
    pub sweep: SweepConfig,
    pub steer_coefficient: f64,
    pub steer_scope: InjectionScope,
    pub n_steering_prompts: usize,
    pub sandbox: SandboxLimits,
    pub attn_enabled: bool,
    pub attn_cases: usize,
}

impl RunConfig {
    pub fn from_config(config: &Config) -> Result<Self> {
        let task = TaskKind::parse(config.require("task")?)?;
        let data_path = PathBuf::from(config.require("data.path")?);
        let output_dir = PathBuf::from(config.require("output")?);
        let seed = config.get_u64("seed", 0)?;

        let statement_kinds = config
            .get_str_list("conflict.statement_kinds", &["default"])
            .iter()
            .map(|s| StatementKind::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let code_kinds = config
            .get_str_list(
                "conflict.code_kinds",
                &["function_deprecate", "function_replace", "operator_deprecate"],
            )
            .iter()
            .map(|s| CodeConflictKind::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let intro_kinds = config
            .get_str_list("conflict.intro_kinds", &["default"])
            .iter()
            .map(|s| IntroKind::parse(s))
            .collect::<Result<Vec<_>>>()?;

        let decode = DecodeParams {
            max_new_tokens: config.get_usize("decode.max_new_tokens", 64)?,
            temperature: config.get_f64("decode.temperature", 0.0)?,
            seed: config.get_u64("decode.seed", seed)?,
            stop_sequences: config
                .get_str_list("decode.stop", &[])
                .into_iter()
                .collect(),
        };

        let scheme = match config.get_or("probe.scheme", "by_response_category").as_str() {
            "by_response_category" => LabelScheme::ByResponseCategory,
            "by_context_type" => LabelScheme::ByContextType,
            other => {
                return Err(Error::Config(format!("unknown probe.scheme `{other}`")));
            }
        };
        let hidden = match config.get("probe.hidden") {
            Some(raw) => Some(raw.parse::<usize>().map_err(|_| {
                Error::Config(format!("probe.hidden must be an integer, got `{raw}`"))
            })?),
            None => None,
        };
        let sweep = SweepConfig {
            train_fraction: config.get_f64("probe.train_fraction", 0.8)?,
            seeds: config.get_u64_list("probe.seeds", &[1, 10, 42, 99, 777])?,
            hidden,
            train: TrainSettings {
                learning_rate: config
                    .get_f64("probe.learning_rate", TrainSettings::default().learning_rate)?,
                max_iters: config.get_usize("probe.max_iters", TrainSettings::default().max_iters)?,
                tolerance: config.get_f64("probe.tolerance", TrainSettings::default().tolerance)?,
                l2: config.get_f64("probe.l2", TrainSettings::default().l2)?,
            },
        };

        let steer_scope = match config.get_or("steer.scope", "all_positions").as_str() {
            "all_positions" => InjectionScope::AllPositions,
            "generated_only" => InjectionScope::GeneratedOnly,
            other => return Err(Error::Config(format!("unknown steer.scope `{other}`"))),
        };

        Ok(Self {
            task,
            data_path,
            output_dir,
            seed,
            statement_kinds,
            code_kinds,
            intro_kinds,
            n_obs: config.get_usize("conflict.n_obs", 6)?,
            pairs_per_obs: config.get_usize("conflict.pairs_per_obs", 10)?,
            decode,
            plant_sentinel: config.get_bool("toy.plant_sentinel", false)?,
            layers: config
                .get_u64_list("probe.layers", &[])?
                .into_iter()
                .map(|l| l as usize)
                .collect(),
            scheme,
            sweep,
            steer_coefficient: config.get_f64("steer.coefficient", 1.0)?,
            steer_scope,
            n_steering_prompts: config.get_usize("steer.n_prompts", 100)?,
            sandbox: SandboxLimits {
                timeout_s: config.get_f64("sandbox.timeout_s", 10.0)?,
                memory_mb: config.get_u64("sandbox.memory_mb", 512)?,
            },
            attn_enabled: config.get_bool("attn.enabled", false)?,
            attn_cases: config.get_usize("attn.cases", 4)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub completed: bool,
    pub at: String,
    pub note: String,
}

/// Run state on disk. Every artifact written below the output directory
/// is listed here, keyed by its path relative to that directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub backend: String,
    pub created_at: String,
    pub updated_at: String,
    pub stages: BTreeMap<String, StageRecord>,
    pub artifacts: BTreeMap<String, String>,
}

impl RunManifest {
    fn new(config_hash: &str) -> Self {
        let now = timestamp();
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash.to_string(),
            backend: String::new(),
            created_at: now.clone(),
            updated_at: now,
            stages: BTreeMap::new(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn stage_completed(&self, stage: Stage) -> bool {
        self.stages
            .get(stage.name())
            .map(|r| r.completed)
            .unwrap_or(false)
    }

    fn save(&mut self, path: &Path) -> Result<()> {
        self.updated_at = timestamp();
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Artifact locations under one output directory.
pub(crate) struct Layout {
    root: PathBuf,
}

impl Layout {
    pub(crate) fn new(root: &Path) -> Self {
        Self { root: root.to_path_buf() }
    }

    pub(crate) fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }
    pub(crate) fn queries(&self) -> PathBuf {
        self.root.join("queries.jsonl")
    }
    pub(crate) fn pk(&self) -> PathBuf {
        self.root.join("pk.jsonl")
    }
    pub(crate) fn cases(&self) -> PathBuf {
        self.root.join("cases.jsonl")
    }
    pub(crate) fn responses(&self) -> PathBuf {
        self.root.join("responses.jsonl")
    }
    pub(crate) fn records(&self) -> PathBuf {
        self.root.join("records.jsonl")
    }
    pub(crate) fn correctness(&self) -> PathBuf {
        self.root.join("correctness.jsonl")
    }
    pub(crate) fn mutated_dir(&self) -> PathBuf {
        self.root.join("mutated")
    }
    pub(crate) fn acts_conflict(&self) -> PathBuf {
        self.root.join("activations").join("conflict")
    }
    pub(crate) fn acts_regular(&self) -> PathBuf {
        self.root.join("activations").join("regular")
    }
    pub(crate) fn probe_dir(&self) -> PathBuf {
        self.root.join("probe")
    }
    pub(crate) fn sweep_csv(&self) -> PathBuf {
        self.probe_dir().join("sweep.csv")
    }
    pub(crate) fn sweep_json(&self) -> PathBuf {
        self.probe_dir().join("sweep.json")
    }
    pub(crate) fn best_probe(&self) -> PathBuf {
        self.probe_dir().join("best_probe.json")
    }
    pub(crate) fn steer_dir(&self) -> PathBuf {
        self.root.join("steer")
    }
    pub(crate) fn steering_csv(&self) -> PathBuf {
        self.steer_dir().join("steering.csv")
    }
    pub(crate) fn steering_audit(&self) -> PathBuf {
        self.steer_dir().join("audit.jsonl")
    }
    pub(crate) fn steering_vector(&self) -> PathBuf {
        self.steer_dir().join("vector.json")
    }
    pub(crate) fn attn_dir(&self) -> PathBuf {
        self.root.join("attn")
    }
    pub(crate) fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }

    pub(crate) fn relative(&self, path: &Path) -> String {
        path.strip_prefix(&self.root)
            .unwrap_or(path)
            .display()
            .to_string()
    }
}

/// Shared state threaded through the stage functions.
pub(crate) struct Ctx {
    pub(crate) run: RunConfig,
    pub(crate) layout: Layout,
    pub(crate) manifest: RunManifest,
    backend: Option<Box<dyn ModelBackend>>,
    config: Config,
}

impl Ctx {
    fn new(config: &Config) -> Result<Self> {
        let run = RunConfig::from_config(config)?;
        let layout = Layout::new(&run.output_dir);
        std::fs::create_dir_all(&run.output_dir)?;
        let hash = config.content_hash();
        let manifest = match std::fs::read_to_string(layout.manifest()) {
            Ok(raw) => {
                let old: RunManifest = serde_json::from_str(&raw)?;
                if old.config_hash == hash {
                    old
                } else {
                    // Changed config invalidates everything downstream.
                    RunManifest::new(&hash)
                }
            }
            Err(_) => RunManifest::new(&hash),
        };
        Ok(Self {
            run,
            layout,
            manifest,
            backend: None,
            config: config.clone(),
        })
    }

    pub(crate) fn backend(&mut self) -> Result<&dyn ModelBackend> {
        if self.backend.is_none() {
            let kind = self.config.get_or("backend.kind", "toy");
            let backend = BackendRegistry::with_builtins().create(&kind, &self.config)?;
            self.manifest.backend = backend.descriptor().name;
            self.backend = Some(backend);
        }
        Ok(self.backend.as_deref().unwrap())
    }

    pub(crate) fn add_artifact(&mut self, path: &Path) {
        let rel = self.layout.relative(path);
        self.manifest.artifacts.insert(rel.clone(), rel);
    }
}

fn check_deps(ctx: &Ctx, stage: Stage) -> Result<()> {
    for dep in stage.deps() {
        if !ctx.manifest.stage_completed(*dep) {
            return Err(Error::MissingStage(format!(
                "{} requires completed stage `{}`",
                stage.name(),
                dep.name()
            )));
        }
    }
    Ok(())
}

fn execute(ctx: &mut Ctx, stage: Stage) -> Result<String> {
    check_deps(ctx, stage)?;
    if stage.needs_backend() {
        ctx.backend()?;
    }
    match stage {
        Stage::Elicit => stages::elicit(ctx),
        Stage::Conflict => stages::conflict(ctx),
        Stage::Generate => stages::generate(ctx),
        Stage::Categorize => stages::categorize(ctx),
        Stage::Activations => stages::activations(ctx),
        Stage::Probe => stages::probe(ctx),
        Stage::Steer => stages::steer(ctx),
        Stage::Attn => stages::attn(ctx),
        Stage::Report => stages::report(ctx),
    }
}

/// Runs one stage (honoring the cache), records the outcome in the
/// manifest, and persists the manifest even on failure.
pub fn run_stage(config: &Config, stage: Stage, force: bool) -> Result<RunManifest> {
    let mut ctx = Ctx::new(config)?;
    run_stage_in(&mut ctx, stage, force)?;
    Ok(ctx.manifest)
}

fn run_stage_in(ctx: &mut Ctx, stage: Stage, force: bool) -> Result<()> {
    if ctx.manifest.stage_completed(stage) && !force {
        let record = ctx.manifest.stages.get_mut(stage.name()).unwrap();
        record.note = "skipped: config hash unchanged".into();
        ctx.manifest.save(&ctx.layout.manifest())?;
        return Ok(());
    }
    match execute(ctx, stage) {
        Ok(note) => {
            ctx.manifest.stages.insert(
                stage.name().to_string(),
                StageRecord {
                    completed: true,
                    at: timestamp(),
                    note,
                },
            );
            ctx.manifest.save(&ctx.layout.manifest())?;
            Ok(())
        }
        Err(err) => {
            ctx.manifest.stages.insert(
                stage.name().to_string(),
                StageRecord {
                    completed: false,
                    at: timestamp(),
                    note: format!("failed: {err}"),
                },
            );
            ctx.manifest.save(&ctx.layout.manifest())?;
            Err(err)
        }
    }
}

/// Runs every stage in order, halting at the first failure. Attention
/// capture is skipped unless `attn.enabled` is set.
pub fn run(config: &Config, force: bool) -> Result<RunManifest> {
    let mut ctx = Ctx::new(config)?;
    for stage in Stage::RUN_ORDER {
        if stage == Stage::Attn && !ctx.run.attn_enabled {
            continue;
        }
        run_stage_in(&mut ctx, stage, force)?;
    }
    Ok(ctx.manifest)
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub(crate) fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let raw = std::fs::read_to_string(path)?;
    let mut items = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(line).map_err(|e| Error::Format {
            path: path.display().to_string(),
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_parsing_round_trips() {
        for stage in Stage::RUN_ORDER {
            assert_eq!(Stage::parse(stage.name()).unwrap(), stage);
        }
        assert!(Stage::parse("bogus").is_err());
    }

    #[test]
    fn run_config_defaults() {
        let mut config = Config::new();
        config.set("task", "wc");
        config.set("data.path", "data/world_capitals.csv");
        config.set("output", "/tmp/out");
        let run = RunConfig::from_config(&config).unwrap();
        assert_eq!(run.task, TaskKind::Wc);
        assert_eq!(run.seed, 0);
        assert_eq!(run.statement_kinds, vec![StatementKind::Default]);
        assert_eq!(run.code_kinds.len(), 3);
        assert_eq!(run.sweep.seeds, vec![1, 10, 42, 99, 777]);
        assert_eq!(run.sweep.train_fraction, 0.8);
        assert_eq!(run.n_steering_prompts, 100);
        assert_eq!(run.steer_coefficient, 1.0);
        assert!(!run.plant_sentinel);
        assert!(run.layers.is_empty());
        assert_eq!(run.scheme, LabelScheme::ByResponseCategory);
    }

    #[test]
    fn run_config_rejects_bad_scheme() {
        let mut config = Config::new();
        config.set("task", "wc");
        config.set("data.path", "x");
        config.set("output", "y");
        config.set("probe.scheme", "by_vibes");
        assert!(matches!(
            RunConfig::from_config(&config),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn missing_required_keys_error() {
        let config = Config::new();
        assert!(RunConfig::from_config(&config).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct Row {
            id: String,
            n: usize,
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.jsonl");
        let rows = vec![
            Row { id: "a".into(), n: 1 },
            Row { id: "b".into(), n: 2 },
        ];
        write_jsonl(&path, &rows).unwrap();
        let back: Vec<Row> = read_jsonl(&path).unwrap();
        assert_eq!(back, rows);
    }
}
