//! Steering vector construction, the success-rate bookkeeping, and a
//! behavioral end-to-end flip on the toy backend.

mod common;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fixture_eval, linear_probe, qa_case, FixtureBackend};
use conflictkit::backend::{
    capture_batch, make_toy_backend, InjectionScope, InjectionSign, InjectionSpec, ModelBackend,
    DEFAULT_TOY_VOCAB, CONFLICT_SENTINEL,
};
use conflictkit::categorize::{categorize_qa, qa_conditions, Category};
use conflictkit::conflict::{
    ConflictCase, ConflictContext, ConflictKind, DecodeParams, PKRecord, Query, StatementKind,
    TaskKind,
};
use conflictkit::probe::{
    split_dataset, train_linear_probe, LabelScheme, LayerSweepTable, ProbeDataset, ProbeKind,
    ProbeWeights, SweepRow, TrainSettings,
};
use conflictkit::steering::{
    build_steering_vector, compute_means, conditions_of_category, run_steering, select_layer,
    write_steering_csv, SteeringReport,
};
use conflictkit::Error;

// ---------------------------------------------------------------------------
// The formula itself
// ---------------------------------------------------------------------------

/// s = coefficient * ((u - v) . theta) theta / ||theta||, recomputed
/// here from scratch and compared on randomized triples.
#[test]
fn vector_matches_direct_formula_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let d = 16;
    for trial in 0..100 {
        let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let theta: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let coefficient = rng.gen_range(0.25..4.0);

        let sv = build_steering_vector(&u, &v, &linear_probe(theta.clone(), 2), coefficient)
            .unwrap();
        assert_eq!(sv.layer, 2);

        let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        let proj: f64 = u
            .iter()
            .zip(&v)
            .zip(&theta)
            .map(|((ui, vi), ti)| (ui - vi) * ti)
            .sum();
        let direct: Vec<f64> = theta.iter().map(|t| coefficient * proj / norm * t).collect();

        let err: f64 = sv
            .s
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale = direct.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        assert!(
            err / scale <= 1e-6,
            "trial {trial}: relative error {} too large",
            err / scale
        );
        assert_eq!(sv.proj, proj, "trial {trial}: projections disagree");
    }
}

/// Identical means and mean differences orthogonal to theta both leave
/// nothing to project, and the vector is exactly zero, not just small.
#[test]
fn degenerate_inputs_produce_exactly_zero_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let theta: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();

    let sv = build_steering_vector(&u, &u, &linear_probe(theta, 1), 1.5).unwrap();
    assert_eq!(sv.proj, 0.0);
    assert_eq!(sv.norm(), 0.0);
    assert!(sv.s.iter().all(|&x| x == 0.0));

    // theta reads only coordinate 0; the means differ only in
    // coordinate 1.
    let mut axis_theta = vec![0.0; 8];
    axis_theta[0] = 2.0;
    let v = u.clone();
    let mut u2 = u;
    u2[1] += 5.0;
    let sv = build_steering_vector(&u2, &v, &linear_probe(axis_theta, 1), 1.0).unwrap();
    assert_eq!(sv.proj, 0.0);
    assert_eq!(sv.norm(), 0.0);
}

#[test]
fn vector_construction_rejects_bad_inputs() {
    let u = vec![1.0; 4];
    let v = vec![0.0; 4];
    assert!(matches!(
        build_steering_vector(&u, &v, &linear_probe(vec![0.0; 4], 0), 1.0).unwrap_err(),
        Error::ZeroTheta
    ));
    assert!(build_steering_vector(&u, &v[..3].to_vec(), &linear_probe(vec![1.0; 4], 0), 1.0)
        .is_err());

    let mut mlp = linear_probe(vec![1.0; 4], 0);
    mlp.kind = ProbeKind::Mlp;
    mlp.weights = ProbeWeights::Mlp {
        w1: vec![vec![1.0; 4]],
        b1: vec![0.0],
        w2: vec![1.0],
        b2: 0.0,
    };
    assert!(build_steering_vector(&u, &v, &mlp, 1.0).is_err());
}

// ---------------------------------------------------------------------------
// Success-rate bookkeeping on a scripted four-case fixture
// ---------------------------------------------------------------------------

/// Of four cases labeled {Parametric, Conflicting, Conflicting, Other},
/// +s attempts the last three and lands two, -s attempts two and lands
/// one: S_PK = 2/3, S_CK = 1/2, S_avg = 3/5, all exact.
#[test]
fn four_case_fixture_rates_are_exact() {
    let cases = vec![
        (qa_case(1), Category::parametric()),
        (qa_case(2), Category::conflicting()),
        (qa_case(3), Category::conflicting()),
        (qa_case(4), Category::other()),
    ];
    let sv = build_steering_vector(
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0; 4],
        &linear_probe(vec![1.0, 0.0, 0.0, 0.0], 0),
        1.0,
    )
    .unwrap();

    let report = run_steering(
        &FixtureBackend,
        "qa",
        &cases,
        &sv,
        InjectionScope::AllPositions,
        &DecodeParams::default(),
        &fixture_eval,
    )
    .unwrap();

    assert_eq!(report.n_pk_attempts, 3);
    assert_eq!(report.n_ck_attempts, 2);
    assert_eq!(report.pk_successes, 2);
    assert_eq!(report.ck_successes, 1);
    assert_eq!(report.s_pk, Some(2.0 / 3.0));
    assert_eq!(report.s_ck, Some(0.5));
    assert_eq!(report.s_avg, Some(0.6));
    assert_eq!(report.per_case.len(), 5);
    assert_eq!(report.model, "fixture");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("steering.csv");
    let empty = SteeringReport {
        task: "code".into(),
        model: "fixture".into(),
        s_pk: None,
        s_ck: None,
        s_avg: None,
        n_pk_attempts: 0,
        n_ck_attempts: 0,
        pk_successes: 0,
        ck_successes: 0,
        proj: 0.0,
        per_case: Vec::new(),
    };
    write_steering_csv(&path, &[report, empty]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text,
        "task,model,s_pk,s_ck,s_avg\nqa,fixture,0.667,0.500,0.600\ncode,fixture,--,--,--\n"
    );
}

// ---------------------------------------------------------------------------
// Toy backend behavior
// ---------------------------------------------------------------------------

fn toy_vocab() -> Vec<String> {
    DEFAULT_TOY_VOCAB.iter().map(|s| s.to_string()).collect()
}

/// A zero coefficient zeroes the vector, and injecting a zero vector
/// reproduces the unsteered generation byte for byte.
#[test]
fn zero_coefficient_is_a_strict_noop() {
    let backend = make_toy_backend(4, 16, &toy_vocab(), 42, true).unwrap();
    let prompt = format!("{CONFLICT_SENTINEL} lyon sits here\nwhat is the capital of france");
    let params = DecodeParams::default();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let v: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let theta: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let sv = build_steering_vector(&u, &v, &linear_probe(theta, 1), 0.0).unwrap();
    assert_eq!(sv.norm(), 0.0);

    let spec = InjectionSpec::new(1, sv.s.iter().map(|&x| x as f32).collect(), InjectionSign::Plus);
    let steered = backend.generate_with_injection(&prompt, &spec, &params).unwrap();
    let baseline = backend.generate(&prompt, &params).unwrap();
    assert_eq!(steered, baseline);
}

/// Full mechanism on the toy model: conflict prompts carry a planted
/// marker, a probe trained to read it supplies theta, and steering
/// against the conflict direction flips the conflicting cases back to
/// their parametric answers.
#[test]
fn toy_steering_flips_conflicting_cases() {
    let backend = make_toy_backend(4, 16, &toy_vocab(), 42, true).unwrap();
    let params = DecodeParams::default();
    let n = 30usize;
    let layer = 1usize;

    // Conflict prompts pair a sentinel-marked context with a query;
    // regular prompts are the bare queries.
    let mut cases = Vec::new();
    let mut conflict_prompts = Vec::new();
    let mut regular_prompts = Vec::new();
    for i in 0..n {
        let query = format!("what is the capital of country{i}");
        let pk_answer = backend.generate(&query, &params).unwrap();
        let context = format!("{CONFLICT_SENTINEL} ck{i} is the capital of country{i}");
        let prompt = ConflictCase::join_prompt(&context, &query);

        conflict_prompts.push((format!("c{i}"), prompt.clone()));
        regular_prompts.push((format!("r{i}"), query.clone()));

        let case = ConflictCase {
            query: Query {
                id: format!("q{i}"),
                task: TaskKind::Wc,
                text: query,
                meta: BTreeMap::new(),
            },
            pk: PKRecord {
                query_id: format!("q{i}"),
                pk_answer: pk_answer.clone(),
                pk_extracted: Some(pk_answer.clone()),
                decode_params: params.clone(),
            },
            context: ConflictContext {
                kind: ConflictKind::Qa {
                    statement: StatementKind::Default,
                },
                text: context,
                ck_payload: format!("ck{i}"),
                template_fill: BTreeMap::new(),
            },
            prompt_text: prompt,
        };

        // Sanity: unsteered conflict prompts echo the context.
        let baseline = backend.generate(&case.prompt_text, &params).unwrap();
        let cat = categorize_qa(&baseline, &pk_answer, &case.context.ck_payload).unwrap();
        assert_eq!(cat, Category::conflicting(), "case {i} baseline");
        cases.push((case, cat));
    }

    // Probe the marker at `layer`, then build the vector from the real
    // activation means.
    let conflict_acts = capture_batch(&backend, &conflict_prompts, &[layer]).unwrap();
    let regular_acts = capture_batch(&backend, &regular_prompts, &[layer]).unwrap();
    let mut x: Vec<Vec<f64>> = Vec::new();
    let mut y = Vec::new();
    for row in &conflict_acts[0].vectors {
        x.push(row.iter().map(|&v| f64::from(v)).collect());
        y.push(1u8);
    }
    for row in &regular_acts[0].vectors {
        x.push(row.iter().map(|&v| f64::from(v)).collect());
        y.push(0u8);
    }
    let ds = ProbeDataset::new(layer, x, y, LabelScheme::ByContextType).unwrap();
    let (train, test) = split_dataset(&ds, 0.8, 42).unwrap();
    let probe = train_linear_probe(&train, 42, &TrainSettings::default()).unwrap();
    let acc = conflictkit::probe::probe_accuracy(&probe, &test);
    assert!(acc >= 0.99, "marker probe should be near perfect, got {acc}");

    let (u, v) = compute_means(&conflict_acts[0], &regular_acts[0]).unwrap();
    // u - v points toward the conflict marker, so flipping conflicting
    // cases back to parametric means steering against it: a negative
    // coefficient hands +s the anti-conflict direction.
    let sv = build_steering_vector(&u, &v, &probe, -1.0).unwrap();
    assert!(sv.proj > 0.0, "probe and mean difference should align");

    let eval = |case: &ConflictCase, resp: &str| {
        let pk = case.pk.pk_extracted.as_deref().unwrap_or("");
        let category = categorize_qa(resp, pk, &case.context.ck_payload)?;
        Ok((category, qa_conditions(resp, pk, &case.context.ck_payload)))
    };
    let report = run_steering(
        &backend,
        "wc",
        &cases,
        &sv,
        InjectionScope::AllPositions,
        &params,
        &eval,
    )
    .unwrap();

    assert_eq!(report.n_pk_attempts, n, "all cases start conflicting");
    let s_pk = report.s_pk.unwrap();
    assert!(
        s_pk >= 0.9,
        "flip rate {s_pk} below 0.9 (proj {}, |s| {})",
        report.proj,
        sv.norm()
    );
}

// ---------------------------------------------------------------------------
// Layer selection and category conditions
// ---------------------------------------------------------------------------

#[test]
fn select_layer_prefers_accuracy_then_lower_layer() {
    let row = |layer: usize, acc: f64| SweepRow {
        layer,
        accuracy_mean: acc,
        accuracy_std: 0.01,
        p_value: 0.001,
        significant: true,
    };
    let table = LayerSweepTable {
        rows: vec![row(0, 0.62), row(1, 0.99), row(2, 0.99), row(3, 0.80)],
    };
    assert_eq!(select_layer(&table).unwrap(), 1);
    assert!(select_layer(&LayerSweepTable::default()).is_err());
}

#[test]
fn category_conditions_map_one_to_one() {
    let cases = [
        (Category::parametric(), true, false),
        (Category::conflicting(), false, true),
        (Category::other_both(), true, true),
        (Category::other_neither(), false, false),
        (Category::other(), false, false),
    ];
    for (cat, pk, ck) in cases {
        let cond = conditions_of_category(&cat);
        assert_eq!((cond.c_pk, cond.c_ck), (pk, ck), "{cat:?}");
    }
}
