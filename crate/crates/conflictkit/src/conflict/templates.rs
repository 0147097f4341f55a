//! The fixed conflict-statement templates.
//!
//! Every public function here renders one template with placeholders
//! substituted and nothing else: no trimming, no rewording. Golden-file
//! tests pin the exact byte output, so any edit to these strings is a
//! breaking change to the dataset definition.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conflict::{
    CodeConflictKind, ConflictContext, ConflictKind, IntroKind, PKRecord, Query, StatementKind,
};
use crate::error::{Error, Result};
use crate::text;

/// Verb phrases for the time-sensitive statements. Drawn uniformly, seeded.
pub const TEMPORAL_VERB_PHRASES: [&str; 5] = [
    "is now",
    "will now be",
    "has become",
    "has just become",
    "has just now become",
];

/// Extra time expressions used only by the Olympics Winners templates.
pub const TEMPORAL_EXPRESSIONS: [&str; 4] = ["just", "yesterday", "today", "last year"];

/// The query fed to the model for a World Capitals row.
pub fn wc_query(country: &str) -> String {
    format!("What is the capital of {country}?")
}

/// The query fed to the model for an Olympics Winners row.
pub fn ow_query(discipline: &str, category: &str, event: &str, year: &str, season: &str) -> String {
    format!(
        "Who is the gold medal winner in the {discipline} {category} {event} event at the {year} {season} Olympics?"
    )
}

/// World Capitals conflict statement. `tvp` is required for the time kinds
/// and ignored otherwise.
pub fn wc_statement(kind: StatementKind, country: &str, capital: &str, tvp: &str) -> String {
    match kind {
        StatementKind::Default => format!("The capital of {country} is {capital}."),
        StatementKind::Time => format!("{capital} {tvp} the capital of {country}."),
        StatementKind::Endorsement => format!(
            "The president of {country} has announced that {capital} is the capital of {country}."
        ),
        StatementKind::TimeEndorsement => format!(
            "The president of {country} has announced that {capital} {tvp} the capital of {country}."
        ),
    }
}

/// Olympics Winners conflict statement. `tvp`/`texpr` are required for the
/// time kinds and ignored otherwise.
#[allow(clippy::too_many_arguments)]
pub fn ow_statement(
    kind: StatementKind,
    person: &str,
    discipline: &str,
    category: &str,
    event: &str,
    year: &str,
    season: &str,
    tvp: &str,
    texpr: &str,
) -> String {
    let scene = format!("the {discipline} {category} {event} event at the {year} {season} Olympics");
    match kind {
        StatementKind::Default => {
            format!("{person} is the gold medal winner in {scene}.")
        }
        StatementKind::Time => {
            format!("{person} {tvp} the new gold medal winner in {scene} as of {texpr}.")
        }
        StatementKind::Endorsement => format!(
            "The president of the IOC has announced that due to a doping scandal {person} is the gold medal winner in {scene}."
        ),
        StatementKind::TimeEndorsement => format!(
            "The president of the IOC has announced that due to a doping scandal {person} {tvp} the new gold medal winner in {scene} as of {texpr}."
        ),
    }
}

/// Code conflict statement: an introductory frame wrapped around the
/// deprecation/replacement sentence for `target`.
pub fn code_statement(kind: CodeConflictKind, intro: IntroKind, target: &str) -> String {
    let body = match kind {
        CodeConflictKind::FnDeprecate => format!(
            "function {target} has been deprecated and removed, meaning it can no longer be called."
        ),
        CodeConflictKind::FnReplace => format!(
            "function {target} has been deprecated, but has been replaced with new_{target} which has an identical implementation and signature to {target}"
        ),
        CodeConflictKind::OpDeprecate => format!(
            "operator {target} has been deprecated and removed, meaning it can no longer be used."
        ),
    };
    match intro {
        IntroKind::Default => format!("The Python {body}"),
        IntroKind::Imagination => {
            format!("You are working in a language that is like Python, except the {body}")
        }
        IntroKind::Update => format!("In the most recent version of Python, the {body}"),
    }
}

/// Builds a QA conflict context for `query` asserting `ck_entity` instead of
/// the model's parametric answer. Seeded draws pick the temporal phrase and
/// (Olympics only) the temporal expression.
pub fn make_qa_conflict(
    query: &Query,
    pk: &PKRecord,
    ck_entity: &str,
    kind: StatementKind,
    rng_seed: u64,
) -> Result<ConflictContext> {
    if let Some(pk_text) = &pk.pk_extracted {
        if text::normalize(pk_text) == text::normalize(ck_entity) {
            return Err(Error::ConflictDegenerate(format!(
                "`{ck_entity}` equals the parametric answer for {}",
                query.id
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let tvp = TEMPORAL_VERB_PHRASES[rng.gen_range(0..TEMPORAL_VERB_PHRASES.len())];
    let texpr = TEMPORAL_EXPRESSIONS[rng.gen_range(0..TEMPORAL_EXPRESSIONS.len())];
    let uses_time = matches!(kind, StatementKind::Time | StatementKind::TimeEndorsement);

    let mut fill = BTreeMap::new();
    let text = match query.task {
        crate::conflict::TaskKind::Wc => {
            let country = query
                .meta
                .get("country")
                .ok_or_else(|| Error::Config(format!("query {} lacks meta.country", query.id)))?;
            fill.insert("country".to_string(), country.clone());
            fill.insert("capital".to_string(), ck_entity.to_string());
            if uses_time {
                fill.insert("temporal_verb_phrase".to_string(), tvp.to_string());
            }
            wc_statement(kind, country, ck_entity, tvp)
        }
        crate::conflict::TaskKind::Ow => {
            let get = |k: &str| -> Result<&String> {
                query
                    .meta
                    .get(k)
                    .ok_or_else(|| Error::Config(format!("query {} lacks meta.{k}", query.id)))
            };
            let (discipline, category, event, year, season) = (
                get("discipline")?,
                get("category")?,
                get("event")?,
                get("year")?,
                get("season")?,
            );
            fill.insert("person".to_string(), ck_entity.to_string());
            fill.insert("discipline".to_string(), discipline.clone());
            fill.insert("category".to_string(), category.clone());
            fill.insert("event".to_string(), event.clone());
            fill.insert("year".to_string(), year.clone());
            fill.insert("season".to_string(), season.clone());
            if uses_time {
                fill.insert("temporal_verb_phrase".to_string(), tvp.to_string());
                fill.insert("temporal_expression".to_string(), texpr.to_string());
            }
            ow_statement(
                kind, ck_entity, discipline, category, event, year, season, tvp, texpr,
            )
        }
        other => {
            return Err(Error::Config(format!(
                "make_qa_conflict called on code task {}",
                other.name()
            )))
        }
    };

    Ok(ConflictContext {
        kind: ConflictKind::Qa { statement: kind },
        text,
        ck_payload: ck_entity.to_string(),
        template_fill: fill,
    })
}

/// Builds a code conflict context against the parametric code in `pk`,
/// picking the target uniformly (seeded) from the extracted function or
/// operator set.
pub fn make_code_conflict(
    pk: &PKRecord,
    kind: CodeConflictKind,
    intro: IntroKind,
    rng_seed: u64,
) -> Result<ConflictContext> {
    let code = pk.pk_extracted.as_deref().ok_or_else(|| {
        Error::ExtractionFailure(format!("no parametric code for {}", pk.query_id))
    })?;
    let facts = crate::pycode::extract_facts(code);
    let pool: Vec<&String> = if kind.targets_operator() {
        facts.operators.iter().collect()
    } else {
        facts.functions.iter().collect()
    };
    if pool.is_empty() {
        return Err(Error::NoTargetAvailable(format!(
            "{} has no {} to target",
            pk.query_id,
            if kind.targets_operator() {
                "operators"
            } else {
                "called functions"
            }
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let target = pool[rng.gen_range(0..pool.len())].clone();

    let mut fill = BTreeMap::new();
    fill.insert("intro".to_string(), intro.name().to_string());
    if kind.targets_operator() {
        fill.insert("operator".to_string(), target.clone());
    } else {
        fill.insert("function".to_string(), target.clone());
    }
    if kind == CodeConflictKind::FnReplace {
        fill.insert("replacement".to_string(), format!("new_{target}"));
    }

    Ok(ConflictContext {
        kind: ConflictKind::Code { kind, intro },
        text: code_statement(kind, intro, &target),
        ck_payload: target,
        template_fill: fill,
    })
}
