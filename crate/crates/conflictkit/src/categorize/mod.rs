//! The response classifier and correctness verdicts.
//!
//! Responses to conflict prompts land in one of three classes:
//! Parametric (the model kept its own answer), Conflicting (it adopted
//! the context's claim), or Other. For QA the class comes from
//! token-boundary containment of the two candidate answers; for code it
//! comes from call-site and operator facts parsed out of the response.
//!
//! Correctness for code responses is decided by executing tests in the
//! sandbox: parametric code must pass as written, conflicting code must
//! pass after the conflict's claim is made real by mutation, and
//! both-ways code must pass under both regimes.

mod proportions;

use serde::{Deserialize, Serialize};

use crate::conflict::{CodeConflictKind, ConflictContext, ConflictKind};
use crate::error::{Error, Result};
use crate::pycode::{
    extract_facts, mutate_deprecate, mutate_replace, run_tests, SandboxLimits, TargetKind,
    TestOutcome,
};
use crate::text::{contains_tokens, normalize};

pub use proportions::{
    tabulate_code_proportions, tabulate_qa_proportions, write_code_proportions_csv,
    write_qa_proportions_csv, CodeProportionRow, QaProportionRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryLabel {
    Parametric,
    Conflicting,
    Other,
}

/// Subdivision of Other for replacement conflicts, where "mentions
/// both" and "mentions neither" are meaningfully different failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtherSub {
    None,
    Both,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub label: CategoryLabel,
    pub sub: OtherSub,
}

impl Category {
    pub fn parametric() -> Self {
        Self {
            label: CategoryLabel::Parametric,
            sub: OtherSub::None,
        }
    }

    pub fn conflicting() -> Self {
        Self {
            label: CategoryLabel::Conflicting,
            sub: OtherSub::None,
        }
    }

    pub fn other() -> Self {
        Self {
            label: CategoryLabel::Other,
            sub: OtherSub::None,
        }
    }

    pub fn other_both() -> Self {
        Self {
            label: CategoryLabel::Other,
            sub: OtherSub::Both,
        }
    }

    pub fn other_neither() -> Self {
        Self {
            label: CategoryLabel::Other,
            sub: OtherSub::Neither,
        }
    }
}

/// Raw evaluation of the two success conditions a response can satisfy:
/// keeping the parametric answer or following the context. Unlike
/// [`Category`] these are not exclusive for QA (a response can contain
/// both answers) and steering success is defined directly on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CondEval {
    pub c_pk: bool,
    pub c_ck: bool,
}

/// Which steering arm produced a response, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringArm {
    None,
    PlusS,
    MinusS,
}

/// One categorized response, the unit every table and probe dataset is
/// built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub case_id: String,
    pub response_text: String,
    /// Extracted code block for code tasks; absent for QA.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_code: Option<String>,
    pub category: Category,
    /// Code: the sandbox verdict from [`evaluate_correctness`].
    /// QA: true exactly when the category is Parametric.
    pub correct: bool,
    pub steering_arm: SteeringArm,
    /// False when a code response failed to parse; such records keep
    /// their fallback category in tables but are excluded from probe
    /// training labels.
    pub response_parse_ok: bool,
    pub c_pk: bool,
    pub c_ck: bool,
}

/// Containment of each candidate answer in the response, via
/// normalized token-boundary matching.
pub fn qa_conditions(response: &str, pk_answer: &str, ck_answer: &str) -> CondEval {
    CondEval {
        c_pk: contains_tokens(response, pk_answer),
        c_ck: contains_tokens(response, ck_answer),
    }
}

/// Classifies a QA response. Requires the two answers to be distinct
/// after normalization; a response containing exactly one of them takes
/// that side, anything else (both or neither) is Other.
pub fn categorize_qa(response: &str, pk_answer: &str, ck_answer: &str) -> Result<Category> {
    if normalize(pk_answer) == normalize(ck_answer) {
        return Err(Error::DegenerateLabels(format!(
            "parametric and conflicting answers normalize identically: {:?}",
            normalize(pk_answer)
        )));
    }
    let cond = qa_conditions(response, pk_answer, ck_answer);
    Ok(match (cond.c_pk, cond.c_ck) {
        (true, false) => Category::parametric(),
        (false, true) => Category::conflicting(),
        _ => Category::other(),
    })
}

/// Success conditions for a code response under a given conflict kind.
///
/// Containment is call-site based: a function "occurs" when it is the
/// callee of a call expression, and an operator when its lexeme is
/// applied. For deprecations the conditions are complementary (the
/// context is followed exactly when the deprecated thing is gone).
/// For replacements each condition demands exclusivity, so code using
/// both names satisfies neither.
pub fn code_conditions(
    response_code: &str,
    kind: CodeConflictKind,
    target: &str,
    replacement: Option<&str>,
) -> CondEval {
    let facts = extract_facts(response_code);
    match kind {
        CodeConflictKind::FnDeprecate => {
            let uses = facts.uses_function(target);
            CondEval {
                c_pk: uses,
                c_ck: !uses,
            }
        }
        CodeConflictKind::OpDeprecate => {
            let uses = facts.uses_operator(target);
            CondEval {
                c_pk: uses,
                c_ck: !uses,
            }
        }
        CodeConflictKind::FnReplace => {
            let uses_original = facts.uses_function(target);
            let uses_replacement = replacement
                .map(|name| facts.uses_function(name))
                .unwrap_or(false);
            CondEval {
                c_pk: uses_original && !uses_replacement,
                c_ck: uses_replacement && !uses_original,
            }
        }
    }
}

/// Classifies a code response against its conflict context.
///
/// Deprecation kinds are binary: the response either still contains the
/// deprecated target (Parametric) or it does not (Conflicting); there
/// is no Other. Replacement kinds split four ways, with Other carrying
/// a Both/Neither subcategory. An unparseable response contains
/// nothing, so it falls to Conflicting (deprecation) or Other/Neither
/// (replacement); callers should flag it via `parse_ok`.
pub fn categorize_code(response_code: &str, context: &ConflictContext) -> Result<Category> {
    let (kind, _) = code_kind_of(context)?;
    let cond = code_conditions(response_code, kind, &context.ck_payload, context.replacement());
    Ok(match kind {
        CodeConflictKind::FnDeprecate | CodeConflictKind::OpDeprecate => {
            if cond.c_pk {
                Category::parametric()
            } else {
                Category::conflicting()
            }
        }
        CodeConflictKind::FnReplace => match (cond.c_pk, cond.c_ck) {
            (true, false) => Category::parametric(),
            (false, true) => Category::conflicting(),
            _ => {
                let facts = extract_facts(response_code);
                let both = facts.uses_function(&context.ck_payload)
                    && context
                        .replacement()
                        .map(|name| facts.uses_function(name))
                        .unwrap_or(false);
                if both {
                    Category::other_both()
                } else {
                    Category::other_neither()
                }
            }
        },
    })
}

/// Everything [`evaluate_correctness`] learned while judging one
/// response, kept so callers can write the mutated source and raw
/// outcomes beside the verdict for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessReport {
    pub correct: bool,
    pub mutated_code: Option<String>,
    pub original_outcome: Option<TestOutcome>,
    pub mutated_outcome: Option<TestOutcome>,
}

/// Sandbox-backed correctness for a categorized code response.
///
/// Parametric responses must pass the tests as written. Conflicting
/// responses must pass after mutation makes the context's claim real:
/// deprecations poison the target, replacements first poison the
/// original name and then rename the replacement's call sites onto it,
/// so code that held on to the original anywhere still fails while a
/// clean adopter runs against the real implementation. Other responses
/// must pass under both regimes. Responses that do not parse are
/// incorrect without touching the sandbox.
pub fn evaluate_correctness(
    category: &Category,
    response_code: &str,
    context: &ConflictContext,
    tests: &[String],
    limits: &SandboxLimits,
) -> Result<CorrectnessReport> {
    let (kind, _) = code_kind_of(context)?;
    if tests.is_empty() {
        return Err(Error::EmptySet(
            "no tests supplied for correctness evaluation".into(),
        ));
    }
    if !extract_facts(response_code).parse_ok {
        return Ok(CorrectnessReport {
            correct: false,
            mutated_code: None,
            original_outcome: None,
            mutated_outcome: None,
        });
    }

    let needs_original = matches!(
        category.label,
        CategoryLabel::Parametric | CategoryLabel::Other
    );
    let needs_mutated = matches!(
        category.label,
        CategoryLabel::Conflicting | CategoryLabel::Other
    );

    let mutated_code = if needs_mutated {
        Some(build_mutation(
            response_code,
            kind,
            &context.ck_payload,
            context.replacement(),
        )?)
    } else {
        None
    };
    let original_outcome = if needs_original {
        Some(run_tests(response_code, tests, limits)?)
    } else {
        None
    };
    let mutated_outcome = match &mutated_code {
        Some(code) => Some(run_tests(code, tests, limits)?),
        None => None,
    };

    let correct = match category.label {
        CategoryLabel::Parametric => original_outcome.as_ref().is_some_and(|o| o.all_passed),
        CategoryLabel::Conflicting => mutated_outcome.as_ref().is_some_and(|o| o.all_passed),
        CategoryLabel::Other => {
            original_outcome.as_ref().is_some_and(|o| o.all_passed)
                && mutated_outcome.as_ref().is_some_and(|o| o.all_passed)
        }
    };
    Ok(CorrectnessReport {
        correct,
        mutated_code,
        original_outcome,
        mutated_outcome,
    })
}

/// The mutation that realizes a conflict's claim for testing purposes.
pub fn build_mutation(
    code: &str,
    kind: CodeConflictKind,
    target: &str,
    replacement: Option<&str>,
) -> Result<String> {
    match kind {
        CodeConflictKind::FnDeprecate => mutate_deprecate(code, target, TargetKind::Function),
        CodeConflictKind::OpDeprecate => mutate_deprecate(code, target, TargetKind::Operator),
        CodeConflictKind::FnReplace => {
            let replacement = replacement.ok_or_else(|| {
                Error::ExtractionFailure(
                    "replacement conflict context carries no replacement name".into(),
                )
            })?;
            let poisoned = mutate_deprecate(code, target, TargetKind::Function)?;
            mutate_replace(&poisoned, replacement, target)
        }
    }
}

fn code_kind_of(context: &ConflictContext) -> Result<(CodeConflictKind, &ConflictContext)> {
    match context.kind {
        ConflictKind::Code { kind, .. } => Ok((kind, context)),
        ConflictKind::Qa { .. } => Err(Error::Alignment(
            "a QA conflict was routed to the code categorizer".into(),
        )),
    }
}
