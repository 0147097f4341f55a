//! Deterministic sampling of conflict cases from a QA corpus.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conflict::{templates, ConflictCase, PKRecord, Query, StatementKind, TaskKind};
use crate::error::{Error, Result};
use crate::text;

/// Selects `n_obs` observations and builds `pairs_per_obs` conflicts for
/// each, drawing conflicting entities from the rest of the corpus. Entities
/// for one observation are distinct and never equal the observation's
/// parametric answer (normalized comparison). Fully deterministic in `seed`.
pub fn sample_conflict_cases(
    queries: &[Query],
    pks: &BTreeMap<String, PKRecord>,
    kind: StatementKind,
    n_obs: usize,
    pairs_per_obs: usize,
    seed: u64,
) -> Result<Vec<ConflictCase>> {
    if n_obs > queries.len() {
        return Err(Error::InsufficientEntities(format!(
            "asked for {n_obs} observations but corpus has {}",
            queries.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..queries.len()).collect();
    order.shuffle(&mut rng);
    order.truncate(n_obs);

    let mut cases = Vec::with_capacity(n_obs * pairs_per_obs);
    for qi in order {
        let query = &queries[qi];
        let pk = pks.get(&query.id).ok_or_else(|| {
            Error::Alignment(format!("no parametric record for query {}", query.id))
        })?;
        let pk_norm = pk.pk_extracted.as_deref().map(text::normalize);

        let mut pool = entity_pool(queries, qi)?;
        pool.retain(|e| Some(text::normalize(e)) != pk_norm);
        if pool.len() < pairs_per_obs {
            return Err(Error::InsufficientEntities(format!(
                "query {} has {} usable conflict entities, need {pairs_per_obs}",
                query.id,
                pool.len()
            )));
        }
        pool.shuffle(&mut rng);
        pool.truncate(pairs_per_obs);

        for entity in pool {
            let context =
                templates::make_qa_conflict(query, pk, &entity, kind, rng.gen::<u64>())?;
            let prompt_text = ConflictCase::join_prompt(&context.text, &query.text);
            cases.push(ConflictCase {
                query: query.clone(),
                pk: pk.clone(),
                context,
                prompt_text,
            });
        }
    }
    Ok(cases)
}

/// Candidate conflicting entities for observation `qi`: other capitals for
/// World Capitals; for Olympics, athletes from the same discipline when that
/// pool is non-trivial, otherwise the whole corpus. Deduplicated on the
/// normalized form, ordered deterministically.
fn entity_pool(queries: &[Query], qi: usize) -> Result<Vec<String>> {
    let query = &queries[qi];
    let (key, same_group_key) = match query.task {
        TaskKind::Wc => ("capital", None),
        TaskKind::Ow => ("person", Some("discipline")),
        other => {
            return Err(Error::Config(format!(
                "conflict sampling only applies to QA tasks, got {}",
                other.name()
            )))
        }
    };
    let own = query.meta.get(key).cloned().unwrap_or_default();
    let own_norm = text::normalize(&own);

    let collect = |same_group_only: bool| -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut pool = Vec::new();
        for (i, other) in queries.iter().enumerate() {
            if i == qi {
                continue;
            }
            if same_group_only {
                if let Some(gk) = same_group_key {
                    if other.meta.get(gk) != query.meta.get(gk) {
                        continue;
                    }
                }
            }
            let Some(entity) = other.meta.get(key) else {
                continue;
            };
            let norm = text::normalize(entity);
            if norm == own_norm || norm.is_empty() {
                continue;
            }
            if seen.insert(norm) {
                pool.push(entity.clone());
            }
        }
        pool
    };

    if same_group_key.is_some() {
        let same = collect(true);
        if same.len() >= 2 {
            return Ok(same);
        }
    }
    Ok(collect(false))
}
