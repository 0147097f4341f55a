//! Corpus ingestion: world-capitals CSV, Olympics CSV, code-problem JSONL.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conflict::{templates, Query, TaskKind};
use crate::error::{Error, Result};

/// A code-generation problem with its assertion-style test suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeProblem {
    pub id: String,
    pub prompt: String,
    pub tests: Vec<String>,
}

fn format_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Loads the corpus for `task` and renders one query per row.
pub fn load_dataset(path: &Path, task: TaskKind) -> Result<Vec<Query>> {
    match task {
        TaskKind::Wc => load_world_capitals(path),
        TaskKind::Ow => load_olympics(path),
        TaskKind::Hep | TaskKind::Mbppp => {
            let problems = load_code_problems(path)?;
            Ok(problems
                .into_iter()
                .map(|p| {
                    let mut meta = BTreeMap::new();
                    meta.insert("problem_id".to_string(), p.id.clone());
                    meta.insert(
                        "tests_ref".to_string(),
                        format!("{}#{}", path.display(), p.id),
                    );
                    Query {
                        id: p.id,
                        task,
                        text: p.prompt,
                        meta,
                    }
                })
                .collect())
        }
    }
}

/// CSV with header `country,capital`.
pub fn load_world_capitals(path: &Path) -> Result<Vec<Query>> {
    let mut reader = csv::Reader::from_path(path)?;
    expect_headers(&mut reader, path, &["country", "capital"])?;
    let mut queries = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let row = row?;
        let country = field(&row, 0, path, line, "country")?;
        let capital = field(&row, 1, path, line, "capital")?;
        let mut meta = BTreeMap::new();
        meta.insert("country".to_string(), country.clone());
        meta.insert("capital".to_string(), capital);
        queries.push(Query {
            id: format!("wc{:04}", i + 1),
            task: TaskKind::Wc,
            text: templates::wc_query(&country),
            meta,
        });
    }
    ensure_nonempty(&queries, path)?;
    Ok(queries)
}

/// CSV with header `person,discipline,category,event,year,season`.
pub fn load_olympics(path: &Path) -> Result<Vec<Query>> {
    let mut reader = csv::Reader::from_path(path)?;
    let cols = ["person", "discipline", "category", "event", "year", "season"];
    expect_headers(&mut reader, path, &cols)?;
    let mut queries = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row?;
        let mut meta = BTreeMap::new();
        for (j, col) in cols.iter().enumerate() {
            meta.insert(col.to_string(), field(&row, j, path, line, col)?);
        }
        queries.push(Query {
            id: format!("ow{:04}", i + 1),
            task: TaskKind::Ow,
            text: templates::ow_query(
                &meta["discipline"],
                &meta["category"],
                &meta["event"],
                &meta["year"],
                &meta["season"],
            ),
            meta,
        });
    }
    ensure_nonempty(&queries, path)?;
    Ok(queries)
}

/// JSON Lines, one problem per line: `{"id": ..., "prompt": ..., "tests": [...]}`.
pub fn load_code_problems(path: &Path) -> Result<Vec<CodeProblem>> {
    let text = std::fs::read_to_string(path)?;
    let mut problems = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let p: CodeProblem = serde_json::from_str(line)
            .map_err(|e| format_err(path, i + 1, format!("bad problem record: {e}")))?;
        if p.id.is_empty() || p.prompt.is_empty() {
            return Err(format_err(path, i + 1, "id and prompt must be non-empty"));
        }
        if p.tests.is_empty() {
            return Err(format_err(path, i + 1, format!("problem {} has no tests", p.id)));
        }
        problems.push(p);
    }
    if problems.is_empty() {
        return Err(format_err(path, 1, "empty corpus"));
    }
    Ok(problems)
}

fn expect_headers(
    reader: &mut csv::Reader<std::fs::File>,
    path: &Path,
    expected: &[&str],
) -> Result<()> {
    let headers = reader.headers()?;
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(format_err(
            path,
            1,
            format!("expected header `{}`, got `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn field(
    row: &csv::StringRecord,
    idx: usize,
    path: &Path,
    line: usize,
    name: &str,
) -> Result<String> {
    let v = row
        .get(idx)
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| format_err(path, line, format!("missing field `{name}`")))?;
    Ok(v.to_string())
}

fn ensure_nonempty(queries: &[Query], path: &Path) -> Result<()> {
    if queries.is_empty() {
        return Err(format_err(path, 1, "empty corpus"));
    }
    Ok(())
}
