//! Full pipeline runs on the toy backend: artifact layout, caching,
//! forced-rerun determinism, and dependency enforcement.

mod common;

use common::toy_run_config as toy_config;
use conflictkit::pipeline::{run, run_stage, Stage};
use conflictkit::Error;

#[test]
fn full_toy_run_writes_artifacts_then_caches_then_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = toy_config(&out);

    let manifest = run(&cfg, false).unwrap();
    assert_eq!(manifest.backend, "toy");
    assert_eq!(manifest.config_hash, cfg.content_hash());

    // Attention capture is disabled by default, everything else ran.
    assert!(!manifest.stages.contains_key("attn"));
    for stage in Stage::RUN_ORDER {
        if stage == Stage::Attn {
            continue;
        }
        assert!(
            manifest.stage_completed(stage),
            "stage {} not completed",
            stage.name()
        );
    }

    // Every artifact the manifest lists actually exists, and the core
    // ones are where the layout says they are.
    assert!(!manifest.artifacts.is_empty());
    for rel in manifest.artifacts.keys() {
        assert!(out.join(rel).exists(), "missing artifact {rel}");
    }
    for rel in [
        "queries.jsonl",
        "pk.jsonl",
        "cases.jsonl",
        "responses.jsonl",
        "records.jsonl",
        "probe/sweep.csv",
        "probe/sweep.json",
        "probe/best_probe.json",
        "steer/steering.csv",
        "steer/vector.json",
        "steer/audit.jsonl",
        "report/proportions.csv",
        "report/sweep.csv",
        "report/accuracy.svg",
        "report/proportions.svg",
    ] {
        assert!(out.join(rel).is_file(), "expected file {rel}");
    }

    // 6 observations x 10 pairs with one statement kind.
    let cases = std::fs::read_to_string(out.join("cases.jsonl")).unwrap();
    assert_eq!(cases.lines().count(), 60);

    // The steering table reflects the anti-conflict coefficient: the
    // toy's conflicting cases flip back to their parametric answers.
    let steering = std::fs::read_to_string(out.join("steer/steering.csv")).unwrap();
    let mut lines = steering.lines();
    assert_eq!(lines.next().unwrap(), "task,model,s_pk,s_ck,s_avg");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "wc");
    assert_eq!(row[1], "toy");
    let s_pk: f64 = row[2].parse().unwrap();
    assert!(s_pk >= 0.9, "toy flip rate {s_pk} below 0.9");

    let before = [
        std::fs::read(out.join("probe/sweep.csv")).unwrap(),
        std::fs::read(out.join("steer/steering.csv")).unwrap(),
        std::fs::read(out.join("report/proportions.csv")).unwrap(),
        std::fs::read(out.join("report/accuracy.svg")).unwrap(),
    ];

    // Unforced rerun touches nothing and says so on every stage.
    let manifest = run(&cfg, false).unwrap();
    for (name, record) in &manifest.stages {
        assert!(record.completed);
        assert_eq!(
            record.note, "skipped: config hash unchanged",
            "stage {name} should have been skipped"
        );
    }

    // Forced rerun recomputes and lands on the same bytes.
    let manifest = run(&cfg, true).unwrap();
    for (name, record) in &manifest.stages {
        assert!(record.completed, "forced rerun failed stage {name}");
        assert_ne!(record.note, "skipped: config hash unchanged");
    }
    let after = [
        std::fs::read(out.join("probe/sweep.csv")).unwrap(),
        std::fs::read(out.join("steer/steering.csv")).unwrap(),
        std::fs::read(out.join("report/proportions.csv")).unwrap(),
        std::fs::read(out.join("report/accuracy.svg")).unwrap(),
    ];
    assert_eq!(before, after, "forced rerun is not byte-stable");
}

#[test]
fn stages_refuse_to_run_before_their_dependencies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy_config(&dir.path().join("run"));

    for stage in [Stage::Report, Stage::Generate, Stage::Steer] {
        match run_stage(&cfg, stage, false) {
            Err(Error::MissingStage(msg)) => {
                assert!(msg.contains(stage.name()), "odd message: {msg}")
            }
            other => panic!("{} should have failed with MissingStage, got {other:?}", stage.name()),
        }
    }

    // The failure is recorded in the on-disk manifest.
    let raw =
        std::fs::read_to_string(dir.path().join("run").join("manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&raw).unwrap();
    let note = manifest["stages"]["steer"]["note"].as_str().unwrap();
    assert!(note.starts_with("failed:"), "note was {note}");
    assert_eq!(manifest["stages"]["steer"]["completed"], false);
}

#[test]
fn changing_the_config_invalidates_completed_stages() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = toy_config(&out);

    run_stage(&cfg, Stage::Elicit, false).unwrap();
    let manifest = run_stage(&cfg, Stage::Conflict, false).unwrap();
    assert!(manifest.stage_completed(Stage::Elicit));
    assert!(manifest.stage_completed(Stage::Conflict));

    // Same output directory, different seed: the old manifest no longer
    // applies and only the freshly run stage is recorded.
    let mut changed = toy_config(&out);
    changed.set("seed", "43");
    let manifest = run_stage(&changed, Stage::Elicit, false).unwrap();
    assert_eq!(manifest.config_hash, changed.content_hash());
    assert!(manifest.stage_completed(Stage::Elicit));
    assert!(!manifest.stage_completed(Stage::Conflict));

    // Downstream stages now see their dependencies as missing again.
    assert!(matches!(
        run_stage(&changed, Stage::Generate, false),
        Err(Error::MissingStage(_))
    ));
}

#[test]
fn run_halts_at_the_first_failing_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut cfg = toy_config(&out);
    cfg.set("data.path", dir.path().join("nope.csv").display().to_string());

    assert!(run(&cfg, false).is_err());
    let raw = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&raw).unwrap();
    assert_eq!(manifest["stages"]["elicit"]["completed"], false);
    assert!(manifest["stages"].get("conflict").is_none());
}

#[test]
fn dependency_graph_respects_run_order() {
    let position = |stage: Stage| {
        Stage::RUN_ORDER
            .iter()
            .position(|s| *s == stage)
            .unwrap()
    };
    for stage in Stage::RUN_ORDER {
        for dep in stage.deps() {
            assert!(
                position(*dep) < position(stage),
                "{} depends on later stage {}",
                stage.name(),
                dep.name()
            );
        }
    }
}
