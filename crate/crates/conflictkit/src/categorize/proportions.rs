//! Proportion tables over categorized responses.
//!
//! QA tables report the percentage of Conflicting / Parametric / Other
//! responses per statement template. Code tables additionally split
//! every cell by test correctness, giving the eight
//! incorrect/correct column pairs for Both, Parametric, Conflicting,
//! and Other/Neither. Every row of either table sums to 100 percent.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Category, CategoryLabel, OtherSub};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaProportionRow {
    pub statement: String,
    pub ck: f64,
    pub pk: f64,
    pub other: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeProportionRow {
    pub perturbation: String,
    pub both_x: f64,
    pub both_ok: f64,
    pub param_x: f64,
    pub param_ok: f64,
    pub conf_x: f64,
    pub conf_ok: f64,
    pub other_x: f64,
    pub other_ok: f64,
}

/// Percentage splits per statement group, rows ordered by group name.
pub fn tabulate_qa_proportions(items: &[(String, Category)]) -> Result<Vec<QaProportionRow>> {
    if items.is_empty() {
        return Err(Error::EmptySet("no records to tabulate".into()));
    }
    let mut groups: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for (group, category) in items {
        let counts = groups.entry(group).or_default();
        match category.label {
            CategoryLabel::Conflicting => counts.0 += 1,
            CategoryLabel::Parametric => counts.1 += 1,
            CategoryLabel::Other => counts.2 += 1,
        }
    }
    Ok(groups
        .into_iter()
        .map(|(group, (ck, pk, other))| {
            let total = (ck + pk + other) as f64;
            QaProportionRow {
                statement: group.to_string(),
                ck: 100.0 * ck as f64 / total,
                pk: 100.0 * pk as f64 / total,
                other: 100.0 * other as f64 / total,
            }
        })
        .collect())
}

/// Percentage splits per perturbation group with correctness columns.
/// Items are (group, category, correct).
pub fn tabulate_code_proportions(
    items: &[(String, Category, bool)],
) -> Result<Vec<CodeProportionRow>> {
    if items.is_empty() {
        return Err(Error::EmptySet("no records to tabulate".into()));
    }
    let mut groups: BTreeMap<&str, [usize; 8]> = BTreeMap::new();
    for (group, category, correct) in items {
        let cells = groups.entry(group).or_default();
        let pair = match (category.label, category.sub) {
            (CategoryLabel::Other, OtherSub::Both) => 0,
            (CategoryLabel::Parametric, _) => 1,
            (CategoryLabel::Conflicting, _) => 2,
            (CategoryLabel::Other, _) => 3,
        };
        cells[pair * 2 + usize::from(*correct)] += 1;
    }
    Ok(groups
        .into_iter()
        .map(|(group, cells)| {
            let total = cells.iter().sum::<usize>() as f64;
            let pct = |i: usize| 100.0 * cells[i] as f64 / total;
            CodeProportionRow {
                perturbation: group.to_string(),
                both_x: pct(0),
                both_ok: pct(1),
                param_x: pct(2),
                param_ok: pct(3),
                conf_x: pct(4),
                conf_ok: pct(5),
                other_x: pct(6),
                other_ok: pct(7),
            }
        })
        .collect())
}

pub fn write_qa_proportions_csv(path: &Path, rows: &[QaProportionRow]) -> Result<()> {
    let mut out = String::from("statement,ck,pk,other\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.2},{:.2},{:.2}\n",
            row.statement, row.ck, row.pk, row.other
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_code_proportions_csv(path: &Path, rows: &[CodeProportionRow]) -> Result<()> {
    let mut out =
        String::from("perturbation,both_x,both_ok,param_x,param_ok,conf_x,conf_ok,other_x,other_ok\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2}\n",
            row.perturbation,
            row.both_x,
            row.both_ok,
            row.param_x,
            row.param_ok,
            row.conf_x,
            row.conf_ok,
            row.other_x,
            row.other_ok
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}
