//! Code categorization against a brute-force containment oracle.
//!
//! The oracle reimplements "call-site containment" from scratch on the
//! raw text: strip comments and string literals, then look for the
//! target as a callee token (identifier immediately followed by an
//! open paren) or as an exact maximal operator-character run. Every
//! snippet in the corpus is hand labeled, and the test demands that
//! the AST-based categorizer, the text oracle, and the hand label all
//! agree. The oracle and corpus live in `common` so the acceptance
//! suite can rerun the same sweep.

mod common;

use std::time::Instant;

use common::{
    context_for, corpus, oracle_calls, oracle_category, oracle_operator, snippet, strip_noncode,
};
use conflictkit::categorize::{categorize_code, code_conditions, Category, CategoryLabel};
use conflictkit::conflict::CodeConflictKind;
use conflictkit::pycode::extract_facts;

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

/// The categorizer, the text oracle, and the hand label agree on every
/// snippet, and the whole sweep stays far under its time budget.
#[test]
fn categorizer_agrees_with_oracle_on_labeled_corpus() {
    let started = Instant::now();
    let corpus = corpus();
    assert!(
        corpus.len() >= 50,
        "corpus has only {} snippets",
        corpus.len()
    );
    for (i, snip) in corpus.iter().enumerate() {
        let facts = extract_facts(snip.code);
        assert!(facts.parse_ok, "snippet {i} must parse: {:?}", snip.code);
        let ctx = context_for(snip);
        let got = categorize_code(snip.code, &ctx).expect("categorize");
        let oracle = oracle_category(snip.code, snip.kind, snip.target, snip.replacement);
        assert_eq!(
            got, snip.label,
            "snippet {i} ({:?} {}): categorizer disagrees with hand label",
            snip.kind, snip.target
        );
        assert_eq!(
            oracle, snip.label,
            "snippet {i} ({:?} {}): oracle disagrees with hand label",
            snip.kind, snip.target
        );
    }
    assert!(
        started.elapsed().as_secs() < 10,
        "corpus sweep took {:?}",
        started.elapsed()
    );
}

/// Success conditions are complementary for deprecations and mutually
/// exclusive for replacements, on every corpus snippet.
#[test]
fn conditions_follow_kind_structure() {
    for snip in corpus() {
        let cond = code_conditions(snip.code, snip.kind, snip.target, snip.replacement);
        match snip.kind {
            CodeConflictKind::FnDeprecate | CodeConflictKind::OpDeprecate => {
                assert_ne!(cond.c_pk, cond.c_ck, "deprecation conditions must differ");
            }
            CodeConflictKind::FnReplace => {
                assert!(
                    !(cond.c_pk && cond.c_ck),
                    "replacement conditions are exclusive"
                );
            }
        }
    }
}

/// Deprecation conflicts are binary: no pairing of corpus code with any
/// function or operator target may come out Other.
#[test]
fn deprecation_kinds_never_yield_other() {
    let fn_targets = ["len", "sum", "sorted", "abs", "append", "sqrt", "missing"];
    let op_targets = ["+", "-", "*", "//", "==", "+=", "not", "and", "%"];
    let codes: Vec<&'static str> = corpus().iter().map(|s| s.code).collect();
    for code in &codes {
        for target in fn_targets {
            let snip = snippet(code, CodeConflictKind::FnDeprecate, target, None, Category::parametric());
            let got = categorize_code(code, &context_for(&snip)).expect("categorize");
            assert_ne!(got.label, CategoryLabel::Other, "fn target {target}");
        }
        for target in op_targets {
            let snip = snippet(code, CodeConflictKind::OpDeprecate, target, None, Category::parametric());
            let got = categorize_code(code, &context_for(&snip)).expect("categorize");
            assert_ne!(got.label, CategoryLabel::Other, "op target {target}");
        }
    }
}

/// Unparseable responses contain nothing: deprecations read as
/// Conflicting, replacements as Other/Neither, and `parse_ok` flags the
/// situation for callers.
#[test]
fn unparseable_code_falls_through_documented_paths() {
    let broken = "def broken(:\n    return len(xs\n";
    assert!(!extract_facts(broken).parse_ok);

    let dep = snippet(
        broken,
        CodeConflictKind::FnDeprecate,
        "len",
        None,
        Category::conflicting(),
    );
    let got = categorize_code(broken, &context_for(&dep)).expect("categorize");
    assert_eq!(got, Category::conflicting());

    let rep = snippet(
        broken,
        CodeConflictKind::FnReplace,
        "len",
        Some("new_len"),
        Category::other_neither(),
    );
    let got = categorize_code(broken, &context_for(&rep)).expect("categorize");
    assert_eq!(got, Category::other_neither());
}

/// Spot checks on the oracle's own text machinery, so a regression in
/// the oracle cannot silently weaken the agreement test.
#[test]
fn oracle_primitives_behave() {
    let stripped = strip_noncode("x = \"len(a)\"  # len(b)\ny = len(c)\n");
    assert!(!stripped.contains("len(a)"));
    assert!(!stripped.contains("len(b)"));
    assert!(stripped.contains("len(c)"));

    assert!(oracle_calls("n = len(xs)", "len"));
    assert!(oracle_calls("n = len (xs)", "len"));
    assert!(oracle_calls("r = math.sqrt(x)", "sqrt"));
    assert!(!oracle_calls("f = map(len, xs)", "len"));
    assert!(!oracle_calls("n = new_len(xs)", "len"));
    assert!(!oracle_calls("def len(xs):\n    return 0", "len"));

    assert!(oracle_operator("a + b", "+"));
    assert!(!oracle_operator("a += b", "+"));
    assert!(oracle_operator("a += b", "+="));
    assert!(!oracle_operator("a ** b", "*"));
    assert!(oracle_operator("not x", "not"));
    assert!(!oracle_operator("nothing = 1", "not"));
}
