//! Command-line driver for the conflictkit pipeline.
//!
//! Every subcommand reads one flat config file, applies the override
//! flags on top, and runs either the whole pipeline or a single stage.
//! Exit codes: 0 success, 2 bad config or usage, 3 stage failure, 4
//! sandbox unavailable.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use conflictkit::pipeline::{run, run_stage, RunManifest, Stage};
use conflictkit::{Config, Error};

#[derive(Parser)]
#[command(
    name = "conflictkit",
    version,
    about = "Build context-memory conflicts, categorize responses, probe and steer models"
)]
struct Cli {
    /// Config file: one `key = value` per line, dotted section names.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the run seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory from the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Override the backend (toy, scripted, adapter).
    #[arg(long, global = true)]
    backend: Option<String>,

    /// Rerun stages even when the manifest already marks them complete.
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run every stage in order (attention only when attn.enabled).
    Run,
    /// Ask the model its parametric answers for every query.
    Elicit,
    /// Build conflict contexts from the elicited answers.
    Conflict,
    /// Generate responses to the conflict prompts.
    Generate,
    /// Label responses and, for code, check correctness in the sandbox.
    Categorize,
    /// Capture residual-stream activations for both prompt forms.
    Activations,
    /// Train per-layer probes and save the best one.
    Probe,
    /// Build the steering vector and rerun both arms.
    Steer,
    /// Capture attention maps for the first few cases.
    Attn,
    /// Tabulate proportions and render the plots.
    Report,
}

impl Command {
    fn stage(self) -> Option<Stage> {
        match self {
            Command::Run => None,
            Command::Elicit => Some(Stage::Elicit),
            Command::Conflict => Some(Stage::Conflict),
            Command::Generate => Some(Stage::Generate),
            Command::Categorize => Some(Stage::Categorize),
            Command::Activations => Some(Stage::Activations),
            Command::Probe => Some(Stage::Probe),
            Command::Steer => Some(Stage::Steer),
            Command::Attn => Some(Stage::Attn),
            Command::Report => Some(Stage::Report),
        }
    }
}

/// Exit code plus the message printed to stderr.
type Failure = (u8, String);

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::SandboxUnavailable(_) => 4,
        _ => 3,
    }
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let Some(path) = &cli.config else {
        return Err((2, "--config <path> is required".to_string()));
    };
    let mut config = Config::load(path).map_err(|e| (2, e.to_string()))?;
    if let Some(seed) = cli.seed {
        config.set("seed", seed.to_string());
    }
    if let Some(output) = &cli.output {
        config.set("output", output.display().to_string());
    }
    if let Some(backend) = &cli.backend {
        config.set("backend.kind", backend.clone());
    }
    Ok(config)
}

fn dispatch(cli: &Cli) -> Result<RunManifest, Failure> {
    let config = load_config(cli)?;
    let result = match cli.command.stage() {
        None => run(&config, cli.force),
        Some(stage) => run_stage(&config, stage, cli.force),
    };
    result.map_err(|e| (exit_code(&e), e.to_string()))
}

fn print_stages(manifest: &RunManifest) {
    for stage in Stage::RUN_ORDER {
        if let Some(record) = manifest.stages.get(stage.name()) {
            let mark = if record.completed { "done" } else { "FAIL" };
            println!("{:<12} {:<4} {}", stage.name(), mark, record.note);
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(manifest) => {
            print_stages(&manifest);
            ExitCode::SUCCESS
        }
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
