//! Stage bodies. Each one reads its inputs from the run layout, does
//! the work, registers every file it wrote, and returns a short note
//! for the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::dump::{read_activation_dump, write_activation_dump};
use crate::backend::{capture_batch, ActivationMatrix, AttentionKind};
use crate::categorize::{
    categorize_code, categorize_qa, code_conditions, evaluate_correctness, qa_conditions,
    tabulate_code_proportions, tabulate_qa_proportions, write_code_proportions_csv,
    write_qa_proportions_csv, Category, CategoryLabel, CondEval, ResponseRecord, SteeringArm,
};
use crate::conflict::corpus::{load_code_problems, load_dataset};
use crate::conflict::sample::sample_conflict_cases;
use crate::conflict::templates::make_code_conflict;
use crate::conflict::{elicit_pk, extract_code_block, ConflictCase, ConflictKind, PKRecord, Query};
use crate::error::{Error, Result};
use crate::pipeline::{plot, read_jsonl, write_jsonl, Ctx};
use crate::probe::{
    build_probe_dataset, load_probe, save_probe, sweep_datasets, transfer_table, write_sweep_csv,
    LabelScheme, LayerSweepTable, Probe, ProbeKind,
};
use crate::pycode::TestOutcome;
use crate::steering::{
    build_steering_vector, compute_means, run_steering, select_layer, write_steering_audit,
    write_steering_csv,
};

/// One generated completion, keyed by the case it answers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct RawResponse {
    pub case_id: String,
    pub text: String,
}

/// Sandbox verdict for one code case, alongside the raw test outcomes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct CorrectnessRow {
    pub case_id: String,
    pub correct: bool,
    pub original_outcome: Option<TestOutcome>,
    pub mutated_outcome: Option<TestOutcome>,
}

pub(crate) fn elicit(ctx: &mut Ctx) -> Result<String> {
    let run = ctx.run.clone();
    let queries = load_dataset(&run.data_path, run.task)?;
    if queries.is_empty() {
        return Err(Error::EmptySet(format!(
            "no queries in {}",
            run.data_path.display()
        )));
    }

    let backend = ctx.backend()?;
    let mut pks = Vec::with_capacity(queries.len());
    for query in &queries {
        pks.push(elicit_pk(backend, query, &run.decode)?);
    }
    let extracted = pks.iter().filter(|p| p.pk_extracted.is_some()).count();

    let queries_path = ctx.layout.queries();
    let pk_path = ctx.layout.pk();
    write_jsonl(&queries_path, &queries)?;
    write_jsonl(&pk_path, &pks)?;
    ctx.add_artifact(&queries_path);
    ctx.add_artifact(&pk_path);
    Ok(format!(
        "{} queries, {} answers extracted",
        queries.len(),
        extracted
    ))
}

pub(crate) fn conflict(ctx: &mut Ctx) -> Result<String> {
    let run = ctx.run.clone();
    let queries: Vec<Query> = read_jsonl(&ctx.layout.queries())?;
    let pk_list: Vec<PKRecord> = read_jsonl(&ctx.layout.pk())?;
    let pks: BTreeMap<String, PKRecord> = pk_list
        .into_iter()
        .map(|r| (r.query_id.clone(), r))
        .collect();

    let mut cases: Vec<ConflictCase> = Vec::new();
    let mut skipped = 0usize;

    if run.task.is_code() {
        let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
        for query in &queries {
            let Some(pk) = pks.get(&query.id) else {
                continue;
            };
            for &kind in &run.code_kinds {
                for &intro in &run.intro_kinds {
                    // Drawn before the attempt so skipped cases do not
                    // shift the seeds of the ones that follow.
                    let fill_seed = rng.gen::<u64>();
                    match make_code_conflict(pk, kind, intro, fill_seed) {
                        Ok(context) => {
                            let prompt_text =
                                ConflictCase::join_prompt(&context.text, &query.text);
                            cases.push(ConflictCase {
                                query: query.clone(),
                                pk: pk.clone(),
                                context,
                                prompt_text,
                            });
                        }
                        Err(Error::NoTargetAvailable(_)) | Err(Error::ExtractionFailure(_)) => {
                            skipped += 1;
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    } else {
        for &kind in &run.statement_kinds {
            cases.extend(sample_conflict_cases(
                &queries,
                &pks,
                kind,
                run.n_obs,
                run.pairs_per_obs,
                run.seed,
            )?);
        }
    }

    if run.plant_sentinel {
        for case in &mut cases {
            case.context.text =
                format!("{} {}", crate::backend::CONFLICT_SENTINEL, case.context.text);
            case.prompt_text = ConflictCase::join_prompt(&case.context.text, &case.query.text);
        }
    }

    if cases.is_empty() {
        return Err(Error::EmptySet("no conflict cases constructed".into()));
    }
    let mut seen = BTreeSet::new();
    for case in &cases {
        if !seen.insert(case.case_id()) {
            return Err(Error::Alignment(format!(
                "duplicate case id {}",
                case.case_id()
            )));
        }
    }

    let path = ctx.layout.cases();
    write_jsonl(&path, &cases)?;
    ctx.add_artifact(&path);
    Ok(format!("{} cases ({} skipped)", cases.len(), skipped))
}

pub(crate) fn generate(ctx: &mut Ctx) -> Result<String> {
    let run = ctx.run.clone();
    let cases: Vec<ConflictCase> = read_jsonl(&ctx.layout.cases())?;

    let backend = ctx.backend()?;
    let mut responses = Vec::with_capacity(cases.len());
    for case in &cases {
        let text = backend.generate(&case.prompt_text, &run.decode)?;
        responses.push(RawResponse {
            case_id: case.case_id(),
            text,
        });
    }

    let path = ctx.layout.responses();
    write_jsonl(&path, &responses)?;
    ctx.add_artifact(&path);
    Ok(format!("{} responses", responses.len()))
}

/// Parametric answer text for containment checks: the extracted form
/// when elicitation produced one, the trimmed raw answer otherwise.
fn pk_text_of(pk: &PKRecord) -> String {
    pk.pk_extracted
        .clone()
        .unwrap_or_else(|| pk.pk_answer.trim().to_string())
}

pub(crate) fn categorize(ctx: &mut Ctx) -> Result<String> {
    let run = ctx.run.clone();
    let cases: Vec<ConflictCase> = read_jsonl(&ctx.layout.cases())?;
    let responses: Vec<RawResponse> = read_jsonl(&ctx.layout.responses())?;
    let by_id: BTreeMap<&str, &str> = responses
        .iter()
        .map(|r| (r.case_id.as_str(), r.text.as_str()))
        .collect();

    let tests_by_problem: BTreeMap<String, Vec<String>> = if run.task.is_code() {
        load_code_problems(&run.data_path)?
            .into_iter()
            .map(|p| (p.id, p.tests))
            .collect()
    } else {
        BTreeMap::new()
    };

    let mutated_dir = ctx.layout.mutated_dir();
    let mut mutated_paths: Vec<PathBuf> = Vec::new();
    let mut records = Vec::with_capacity(cases.len());
    let mut correctness = Vec::new();

    for case in &cases {
        let case_id = case.case_id();
        let response = *by_id.get(case_id.as_str()).ok_or_else(|| {
            Error::Alignment(format!("no response recorded for case {case_id}"))
        })?;

        match &case.context.kind {
            ConflictKind::Qa { .. } => {
                let pk_text = pk_text_of(&case.pk);
                let cond = qa_conditions(response, &pk_text, &case.context.ck_payload);
                let category = categorize_qa(response, &pk_text, &case.context.ck_payload)?;
                records.push(ResponseRecord {
                    case_id,
                    response_text: response.to_string(),
                    response_code: None,
                    category,
                    correct: category.label == CategoryLabel::Parametric,
                    steering_arm: SteeringArm::None,
                    response_parse_ok: true,
                    c_pk: cond.c_pk,
                    c_ck: cond.c_ck,
                });
            }
            ConflictKind::Code { kind, .. } => {
                let code_opt = extract_code_block(response);
                let code = code_opt.clone().unwrap_or_default();
                let category = categorize_code(&code, &case.context)?;
                let cond = code_conditions(
                    &code,
                    *kind,
                    &case.context.ck_payload,
                    case.context.replacement(),
                );
                let parse_ok =
                    code_opt.is_some() && crate::pycode::extract_facts(&code).parse_ok;

                let problem_id = case
                    .query
                    .meta
                    .get("problem_id")
                    .unwrap_or(&case.query.id);
                let tests = tests_by_problem.get(problem_id).ok_or_else(|| {
                    Error::Alignment(format!("no tests found for problem {problem_id}"))
                })?;
                let verdict =
                    evaluate_correctness(&category, &code, &case.context, tests, &run.sandbox)?;
                if let Some(mutated) = &verdict.mutated_code {
                    std::fs::create_dir_all(&mutated_dir)?;
                    let path = mutated_dir.join(format!("{case_id}.py"));
                    std::fs::write(&path, mutated)?;
                    mutated_paths.push(path);
                }
                correctness.push(CorrectnessRow {
                    case_id: case_id.clone(),
                    correct: verdict.correct,
                    original_outcome: verdict.original_outcome,
                    mutated_outcome: verdict.mutated_outcome,
                });
                records.push(ResponseRecord {
                    case_id,
                    response_text: response.to_string(),
                    response_code: code_opt,
                    category,
                    correct: verdict.correct,
                    steering_arm: SteeringArm::None,
                    response_parse_ok: parse_ok,
                    c_pk: cond.c_pk,
                    c_ck: cond.c_ck,
                });
            }
        }
    }

    let records_path = ctx.layout.records();
    write_jsonl(&records_path, &records)?;
    ctx.add_artifact(&records_path);
    if run.task.is_code() {
        let correctness_path = ctx.layout.correctness();
        write_jsonl(&correctness_path, &correctness)?;
        ctx.add_artifact(&correctness_path);
        for path in &mutated_paths {
            ctx.add_artifact(path);
        }
    }

    let parametric = records
        .iter()
        .filter(|r| r.category.label == CategoryLabel::Parametric)
        .count();
    let conflicting = records
        .iter()
        .filter(|r| r.category.label == CategoryLabel::Conflicting)
        .count();
    Ok(format!(
        "{} records: {} parametric, {} conflicting, {} other",
        records.len(),
        parametric,
        conflicting,
        records.len() - parametric - conflicting
    ))
}

pub(crate) fn activations(ctx: &mut Ctx) -> Result<String> {
    let run = ctx.run.clone();
    let cases: Vec<ConflictCase> = read_jsonl(&ctx.layout.cases())?;
    let conflict_prompts: Vec<(String, String)> = cases
        .iter()
        .map(|c| (c.case_id(), c.prompt_text.clone()))
        .collect();
    // The bare query, as a same-length batch so the two matrices stay
    // row-aligned case by case.
    let regular_prompts: Vec<(String, String)> = cases
        .iter()
        .map(|c| (format!("q:{}", c.case_id()), c.query.text.clone()))
        .collect();

    let backend = ctx.backend()?;
    let descriptor = backend.descriptor();
    let layers: Vec<usize> = if run.layers.is_empty() {
        (0..descriptor.n_layers).collect()
    } else {
        run.layers.clone()
    };
    let conflict_mats = capture_batch(backend, &conflict_prompts, &layers)?;
    let regular_mats = capture_batch(backend, &regular_prompts, &layers)?;

    let conflict_dir = ctx.layout.acts_conflict();
    let regular_dir = ctx.layout.acts_regular();
    std::fs::create_dir_all(&conflict_dir)?;
    std::fs::create_dir_all(&regular_dir)?;
    write_activation_dump(&conflict_dir, &descriptor.name, &conflict_mats)?;
    write_activation_dump(&regular_dir, &descriptor.name, &regular_mats)?;
    add_dir_artifacts(ctx, &conflict_dir)?;
    add_dir_artifacts(ctx, &regular_dir)?;
    Ok(format!(
        "{} prompts x {} layers, both prompt forms",
        cases.len(),
        layers.len()
    ))
}

/// Registers every file directly inside `dir`, in name order.
fn add_dir_artifacts(ctx: &mut Ctx, dir: &std::path::Path) -> Result<()> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    for path in paths {
        ctx.add_artifact(&path);
    }
    Ok(())
}

fn merge_matrices(a: &ActivationMatrix, b: &ActivationMatrix) -> Result<ActivationMatrix> {
    if a.layer != b.layer {
        return Err(Error::LayerMismatch {
            a: a.layer,
            b: b.layer,
        });
    }
    if a.hidden_dim() != b.hidden_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.hidden_dim(),
            got: b.hidden_dim(),
        });
    }
    let mut vectors = a.vectors.clone();
    vectors.extend(b.vectors.iter().cloned());
    let mut prompt_ids = a.prompt_ids.clone();
    prompt_ids.extend(b.prompt_ids.iter().cloned());
    Ok(ActivationMatrix {
        layer: a.layer,
        vectors,
        prompt_ids,
        position_policy: a.position_policy,
    })
}

pub(crate) fn probe(ctx: &mut Ctx) -> Result<String> {
    let run = ctx.run.clone();
    let records: Vec<ResponseRecord> = read_jsonl(&ctx.layout.records())?;
    let (_, conflict_mats) = read_activation_dump(&ctx.layout.acts_conflict())?;

    let datasets = match run.scheme {
        LabelScheme::ByResponseCategory => conflict_mats
            .iter()
            .map(|m| build_probe_dataset(&records, m, run.scheme))
            .collect::<Result<Vec<_>>>()?,
        LabelScheme::ByContextType => {
            let (_, regular_mats) = read_activation_dump(&ctx.layout.acts_regular())?;
            if regular_mats.len() != conflict_mats.len() {
                return Err(Error::Alignment(
                    "conflict and regular dumps cover different layers".into(),
                ));
            }
            conflict_mats
                .iter()
                .zip(&regular_mats)
                .map(|(c, r)| build_probe_dataset(&records, &merge_matrices(c, r)?, run.scheme))
                .collect::<Result<Vec<_>>>()?
        }
    };

    let outcome = sweep_datasets(&datasets, ProbeKind::Linear, &run.sweep)?;

    std::fs::create_dir_all(ctx.layout.probe_dir())?;
    let sweep_json = ctx.layout.sweep_json();
    std::fs::write(&sweep_json, serde_json::to_string_pretty(&outcome.table)?)?;
    let sweep_csv = ctx.layout.sweep_csv();
    let (qa_col, code_col) = if run.task.is_code() {
        (None, Some(&outcome.table))
    } else {
        (Some(&outcome.table), None)
    };
    write_sweep_csv(&sweep_csv, &transfer_table(qa_col, code_col, None, None))?;

    let layer = select_layer(&outcome.table)?;
    let mut best: Option<&Probe> = None;
    for p in outcome.probes.iter().filter(|p| p.layer == layer) {
        // Strict comparison keeps the earliest seed on ties.
        if best.map(|b| p.test_accuracy > b.test_accuracy).unwrap_or(true) {
            best = Some(p);
        }
    }
    let best =
        best.ok_or_else(|| Error::EmptySet("no probes trained at the selected layer".into()))?;
    let best_path = ctx.layout.best_probe();
    save_probe(best, &best_path)?;

    ctx.add_artifact(&sweep_json);
    ctx.add_artifact(&sweep_csv);
    ctx.add_artifact(&best_path);
    let mean = outcome
        .table
        .row(layer)
        .map(|r| r.accuracy_mean)
        .unwrap_or(0.0);
    Ok(format!(
        "swept {} layers, best layer {} (mean accuracy {:.4})",
        datasets.len(),
        layer,
        mean
    ))
}

/// Recategorizes a steered response with the same rules the categorize
/// stage applied to the baseline.
fn steer_eval(case: &ConflictCase, response: &str) -> Result<(Category, CondEval)> {
    match &case.context.kind {
        ConflictKind::Qa { .. } => {
            let pk_text = pk_text_of(&case.pk);
            let cond = qa_conditions(response, &pk_text, &case.context.ck_payload);
            let category = categorize_qa(response, &pk_text, &case.context.ck_payload)?;
            Ok((category, cond))
        }
        ConflictKind::Code { kind, .. } => {
            let code = extract_code_block(response).unwrap_or_default();
            let category = categorize_code(&code, &case.context)?;
            let cond = code_conditions(
                &code,
                *kind,
                &case.context.ck_payload,
                case.context.replacement(),
            );
            Ok((category, cond))
        }
    }
}

pub(crate) fn steer(ctx: &mut Ctx) -> Result<String> {
    let run = ctx.run.clone();
    let probe = load_probe(&ctx.layout.best_probe())?;
    let (_, conflict_mats) = read_activation_dump(&ctx.layout.acts_conflict())?;
    let (_, regular_mats) = read_activation_dump(&ctx.layout.acts_regular())?;
    let find = |mats: &[ActivationMatrix], which: &str| -> Result<ActivationMatrix> {
        mats.iter()
            .find(|m| m.layer == probe.layer)
            .cloned()
            .ok_or_else(|| {
                Error::Alignment(format!("{which} dump has no layer {}", probe.layer))
            })
    };
    let cm = find(&conflict_mats, "conflict")?;
    let rm = find(&regular_mats, "regular")?;
    let (u, v) = compute_means(&cm, &rm)?;
    let sv = build_steering_vector(&u, &v, &probe, run.steer_coefficient)?;

    let records: Vec<ResponseRecord> = read_jsonl(&ctx.layout.records())?;
    let cases: Vec<ConflictCase> = read_jsonl(&ctx.layout.cases())?;
    let cat_by_id: BTreeMap<String, Category> = records
        .iter()
        .map(|r| (r.case_id.clone(), r.category))
        .collect();
    let mut pairs: Vec<(ConflictCase, Category)> = Vec::new();
    for case in cases {
        if let Some(cat) = cat_by_id.get(&case.case_id()) {
            pairs.push((case, *cat));
        }
    }
    pairs.truncate(run.n_steering_prompts);
    if pairs.is_empty() {
        return Err(Error::EmptySet("no categorized cases to steer".into()));
    }

    let task_name = run.task.name().to_string();
    let backend = ctx.backend()?;
    let report = run_steering(
        backend,
        &task_name,
        &pairs,
        &sv,
        run.steer_scope,
        &run.decode,
        &steer_eval,
    )?;

    std::fs::create_dir_all(ctx.layout.steer_dir())?;
    let vector_path = ctx.layout.steering_vector();
    std::fs::write(&vector_path, serde_json::to_string_pretty(&sv)?)?;
    let csv_path = ctx.layout.steering_csv();
    write_steering_csv(&csv_path, std::slice::from_ref(&report))?;
    let audit_path = ctx.layout.steering_audit();
    write_steering_audit(&audit_path, &report)?;
    ctx.add_artifact(&vector_path);
    ctx.add_artifact(&csv_path);
    ctx.add_artifact(&audit_path);

    let rate = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "--".into());
    Ok(format!(
        "layer {}: s_pk {} ({} attempts), s_ck {} ({} attempts)",
        probe.layer,
        rate(report.s_pk),
        report.n_pk_attempts,
        rate(report.s_ck),
        report.n_ck_attempts
    ))
}

pub(crate) fn attn(ctx: &mut Ctx) -> Result<String> {
    let run = ctx.run.clone();
    let cases: Vec<ConflictCase> = read_jsonl(&ctx.layout.cases())?;
    let responses: Vec<RawResponse> = read_jsonl(&ctx.layout.responses())?;
    let by_id: BTreeMap<&str, &str> = responses
        .iter()
        .map(|r| (r.case_id.as_str(), r.text.as_str()))
        .collect();

    let take = run.attn_cases.min(cases.len());
    let backend = ctx.backend()?;
    let mut files: Vec<(String, String)> = Vec::new();
    for case in cases.iter().take(take) {
        let case_id = case.case_id();
        let response = *by_id.get(case_id.as_str()).ok_or_else(|| {
            Error::Alignment(format!("no response recorded for case {case_id}"))
        })?;
        for (kind, suffix) in [
            (AttentionKind::SelfAttention, "self"),
            (AttentionKind::CrossAttention, "cross"),
        ] {
            let maps = backend.attention_maps(&case.prompt_text, response, kind)?;
            files.push((
                format!("{case_id}.{suffix}.json"),
                serde_json::to_string_pretty(&maps)?,
            ));
        }
    }

    let dir = ctx.layout.attn_dir();
    std::fs::create_dir_all(&dir)?;
    for (name, body) in &files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        ctx.add_artifact(&path);
    }
    Ok(format!("{} cases, self and cross maps", take))
}

pub(crate) fn report(ctx: &mut Ctx) -> Result<String> {
    let run = ctx.run.clone();
    let records: Vec<ResponseRecord> = read_jsonl(&ctx.layout.records())?;
    let cases: Vec<ConflictCase> = read_jsonl(&ctx.layout.cases())?;
    let group_of: BTreeMap<String, String> = cases
        .iter()
        .map(|c| {
            let group = match &c.context.kind {
                ConflictKind::Qa { statement } => statement.name().to_string(),
                ConflictKind::Code { kind, .. } => kind.name().to_string(),
            };
            (c.case_id(), group)
        })
        .collect();
    let group = |case_id: &str| -> Result<String> {
        group_of
            .get(case_id)
            .cloned()
            .ok_or_else(|| Error::Alignment(format!("record for unknown case {case_id}")))
    };

    let dir = ctx.layout.report_dir();
    std::fs::create_dir_all(&dir)?;
    let proportions_csv = dir.join("proportions.csv");

    let (segments, bar_groups): (Vec<&str>, Vec<(String, Vec<f64>)>) = if run.task.is_code() {
        let mut items = Vec::with_capacity(records.len());
        for r in &records {
            items.push((group(&r.case_id)?, r.category, r.correct));
        }
        let rows = tabulate_code_proportions(&items)?;
        write_code_proportions_csv(&proportions_csv, &rows)?;
        let segments = vec![
            "both_x", "both_ok", "param_x", "param_ok", "conf_x", "conf_ok", "other_x",
            "other_ok",
        ];
        let groups = rows
            .iter()
            .map(|r| {
                (
                    r.perturbation.clone(),
                    vec![
                        r.both_x, r.both_ok, r.param_x, r.param_ok, r.conf_x, r.conf_ok,
                        r.other_x, r.other_ok,
                    ],
                )
            })
            .collect();
        (segments, groups)
    } else {
        let mut items = Vec::with_capacity(records.len());
        for r in &records {
            items.push((group(&r.case_id)?, r.category));
        }
        let rows = tabulate_qa_proportions(&items)?;
        write_qa_proportions_csv(&proportions_csv, &rows)?;
        let groups = rows
            .iter()
            .map(|r| (r.statement.clone(), vec![r.ck, r.pk, r.other]))
            .collect();
        (vec!["ck", "pk", "other"], groups)
    };

    let sweep_copy = dir.join("sweep.csv");
    std::fs::copy(ctx.layout.sweep_csv(), &sweep_copy)?;
    let mut copied_steering = false;
    let steering_copy = dir.join("steering.csv");
    if ctx.layout.steering_csv().is_file() {
        std::fs::copy(ctx.layout.steering_csv(), &steering_copy)?;
        copied_steering = true;
    }

    let table: LayerSweepTable =
        serde_json::from_str(&std::fs::read_to_string(ctx.layout.sweep_json())?)?;
    let points: Vec<(f64, f64)> = table
        .rows
        .iter()
        .map(|r| (r.layer as f64, r.accuracy_mean))
        .collect();
    let accuracy_svg = dir.join("accuracy.svg");
    std::fs::write(
        &accuracy_svg,
        plot::line_plot_svg("Probe accuracy by layer", "layer", "accuracy", &points),
    )?;
    let proportions_svg = dir.join("proportions.svg");
    std::fs::write(
        &proportions_svg,
        plot::stacked_bars_svg("Response proportions", &segments, &bar_groups),
    )?;

    ctx.add_artifact(&proportions_csv);
    ctx.add_artifact(&sweep_copy);
    if copied_steering {
        ctx.add_artifact(&steering_copy);
    }
    ctx.add_artifact(&accuracy_svg);
    ctx.add_artifact(&proportions_svg);
    Ok(format!(
        "proportions over {} records, {} plots",
        records.len(),
        2
    ))
}
