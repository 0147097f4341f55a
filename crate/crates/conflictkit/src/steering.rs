//! Activation steering: push generations toward parametric or context
//! knowledge along a probe direction.
//!
//! The vector is s = ((u - v) . theta) theta / ||theta||2, where u and v
//! are mean activations over conflict and regular prompts and theta is a
//! linear probe's weight vector. +s regenerates cases that were not
//! already Parametric, -s regenerates those not already Conflicting, and
//! success is counted on the steered response's PK/CK conditions.
//!
//! Note the sign question this leaves open: u - v points from regular
//! toward conflicting activations, yet the success metrics attach +s to
//! PK steering. The code follows the formulas as written and records
//! the projection scalar (u - v) . theta on both the vector and the
//! report so runs can be inspected for a per-task sign flip.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::{ActivationMatrix, InjectionScope, InjectionSign, InjectionSpec, ModelBackend};
use crate::categorize::{Category, CategoryLabel, CondEval, OtherSub, SteeringArm};
use crate::conflict::{ConflictCase, DecodeParams};
use crate::error::{Error, Result};
use crate::probe::{probe_id, LayerSweepTable, Probe, ProbeWeights};

/// A constructed steering vector, kept together with its ingredients so
/// the norm and colinearity invariants stay checkable after the fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringVector {
    pub layer: usize,
    pub s: Vec<f64>,
    /// Id of the probe whose weights supplied theta.
    pub theta_ref: String,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub coefficient: f64,
    /// The raw projection (u - v) . theta before coefficient scaling.
    pub proj: f64,
}

impl SteeringVector {
    pub fn norm(&self) -> f64 {
        self.s.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn injection(&self, sign: InjectionSign, scope: InjectionScope) -> InjectionSpec {
        let mut spec = InjectionSpec::new(
            self.layer,
            self.s.iter().map(|&x| x as f32).collect(),
            sign,
        );
        spec.scope = scope;
        spec
    }
}

/// Column means of the conflict-prompt and regular-prompt activations.
pub fn compute_means(
    acts_conflict: &ActivationMatrix,
    acts_regular: &ActivationMatrix,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if acts_conflict.layer != acts_regular.layer {
        return Err(Error::LayerMismatch {
            a: acts_conflict.layer,
            b: acts_regular.layer,
        });
    }
    let u = column_mean(acts_conflict)?;
    let v = column_mean(acts_regular)?;
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    Ok((u, v))
}

fn column_mean(acts: &ActivationMatrix) -> Result<Vec<f64>> {
    if acts.vectors.is_empty() {
        return Err(Error::EmptySet(format!(
            "no activation rows at layer {}",
            acts.layer
        )));
    }
    let dim = acts.hidden_dim();
    let mut mean = vec![0.0f64; dim];
    for row in &acts.vectors {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += f64::from(x);
        }
    }
    let n = acts.vectors.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}

/// s = coefficient * ((u - v) . theta) theta / ||theta||2. The probe
/// must be linear; theta is its weight vector (bias ignored).
pub fn build_steering_vector(
    u: &[f64],
    v: &[f64],
    probe: &Probe,
    coefficient: f64,
) -> Result<SteeringVector> {
    let theta = match &probe.weights {
        ProbeWeights::Linear { w, .. } => w,
        ProbeWeights::Mlp { .. } => {
            return Err(Error::Config(
                "steering requires a linear probe, got an mlp".into(),
            ))
        }
    };
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    if theta.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: theta.len(),
        });
    }
    let theta_norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if theta_norm == 0.0 {
        return Err(Error::ZeroTheta);
    }
    let proj: f64 = u
        .iter()
        .zip(v)
        .zip(theta)
        .map(|((&ui, &vi), &ti)| (ui - vi) * ti)
        .sum();
    let scale = coefficient * proj / theta_norm;
    Ok(SteeringVector {
        layer: probe.layer,
        s: theta.iter().map(|&t| scale * t).collect(),
        theta_ref: probe_id(probe),
        u: u.to_vec(),
        v: v.to_vec(),
        coefficient,
        proj,
    })
}

/// The layer whose probe scored best; ties break toward the lowest
/// layer index.
pub fn select_layer(sweep: &LayerSweepTable) -> Result<usize> {
    let mut best: Option<&crate::probe::SweepRow> = None;
    for row in &sweep.rows {
        let better = match best {
            None => true,
            Some(b) => {
                row.accuracy_mean > b.accuracy_mean
                    || (row.accuracy_mean == b.accuracy_mean && row.layer < b.layer)
            }
        };
        if better {
            best = Some(row);
        }
    }
    best.map(|r| r.layer)
        .ok_or_else(|| Error::EmptySet("layer sweep has no rows".into()))
}

/// One steered regeneration in the audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeredCase {
    pub case_id: String,
    pub arm: SteeringArm,
    pub baseline_category: Category,
    pub steered_category: Category,
    pub steered_conditions: CondEval,
    pub success: bool,
    pub response_text: String,
}

/// Steering success rates plus the per-case audit. Rates are absent
/// when their attempt set is empty (rendered "--" in the CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringReport {
    pub task: String,
    pub model: String,
    pub s_pk: Option<f64>,
    pub s_ck: Option<f64>,
    pub s_avg: Option<f64>,
    pub n_pk_attempts: usize,
    pub n_ck_attempts: usize,
    pub pk_successes: usize,
    pub ck_successes: usize,
    /// Copied from the vector for the sign-question audit.
    pub proj: f64,
    pub per_case: Vec<SteeredCase>,
}

/// Recategorizes a steered response for its case, returning the
/// category and the raw PK/CK conditions it satisfies.
pub type SteerEval<'a> = dyn Fn(&ConflictCase, &str) -> Result<(Category, CondEval)> + 'a;

/// Runs both steering arms. Cases arrive with their baseline category;
/// +s regenerates every case not already Parametric and succeeds when
/// the steered response satisfies the PK condition, -s mirrors that for
/// Conflicting and the CK condition. S_avg pools successes over
/// attempts across both arms.
#[allow(clippy::too_many_arguments)]
pub fn run_steering(
    backend: &dyn ModelBackend,
    task: &str,
    cases: &[(ConflictCase, Category)],
    sv: &SteeringVector,
    scope: InjectionScope,
    params: &DecodeParams,
    eval: &SteerEval,
) -> Result<SteeringReport> {
    let mut per_case = Vec::new();
    let mut n_pk = 0usize;
    let mut n_ck = 0usize;
    let mut pk_ok = 0usize;
    let mut ck_ok = 0usize;

    for (case, baseline) in cases {
        if baseline.label != CategoryLabel::Parametric {
            n_pk += 1;
            let steered = steer_one(backend, case, sv, InjectionSign::Plus, scope, params, eval)?;
            let success = steered.1.c_pk;
            pk_ok += usize::from(success);
            per_case.push(SteeredCase {
                case_id: case.case_id(),
                arm: SteeringArm::PlusS,
                baseline_category: *baseline,
                steered_category: steered.0,
                steered_conditions: steered.1,
                success,
                response_text: steered.2,
            });
        }
        if baseline.label != CategoryLabel::Conflicting {
            n_ck += 1;
            let steered = steer_one(backend, case, sv, InjectionSign::Minus, scope, params, eval)?;
            let success = steered.1.c_ck;
            ck_ok += usize::from(success);
            per_case.push(SteeredCase {
                case_id: case.case_id(),
                arm: SteeringArm::MinusS,
                baseline_category: *baseline,
                steered_category: steered.0,
                steered_conditions: steered.1,
                success,
                response_text: steered.2,
            });
        }
    }

    let rate = |ok: usize, n: usize| (n > 0).then(|| ok as f64 / n as f64);
    Ok(SteeringReport {
        task: task.to_string(),
        model: backend.descriptor().name,
        s_pk: rate(pk_ok, n_pk),
        s_ck: rate(ck_ok, n_ck),
        s_avg: rate(pk_ok + ck_ok, n_pk + n_ck),
        n_pk_attempts: n_pk,
        n_ck_attempts: n_ck,
        pk_successes: pk_ok,
        ck_successes: ck_ok,
        proj: sv.proj,
        per_case,
    })
}

fn steer_one(
    backend: &dyn ModelBackend,
    case: &ConflictCase,
    sv: &SteeringVector,
    sign: InjectionSign,
    scope: InjectionScope,
    params: &DecodeParams,
    eval: &SteerEval,
) -> Result<(Category, CondEval, String)> {
    let spec = sv.injection(sign, scope);
    let response = backend.generate_with_injection(&case.prompt_text, &spec, params)?;
    let (category, cond) = eval(case, &response)?;
    Ok((category, cond, response))
}

/// Success conditions a steered category implies on its own, used when
/// only a category is available: Parametric satisfies PK, Conflicting
/// satisfies CK, and Other/Both satisfies both.
pub fn conditions_of_category(category: &Category) -> CondEval {
    let both = category.label == CategoryLabel::Other && category.sub == OtherSub::Both;
    CondEval {
        c_pk: category.label == CategoryLabel::Parametric || both,
        c_ck: category.label == CategoryLabel::Conflicting || both,
    }
}

/// One row per report: task, model, then the three success rates.
/// Rates print with three decimals; absent rates print "--".
pub fn write_steering_csv(path: &Path, reports: &[SteeringReport]) -> Result<()> {
    let cell = |v: Option<f64>| match v {
        Some(v) => format!("{v:.3}"),
        None => "--".into(),
    };
    let mut out = String::from("task,model,s_pk,s_ck,s_avg\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.task,
            r.model,
            cell(r.s_pk),
            cell(r.s_ck),
            cell(r.s_avg)
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One JSON line per steered regeneration.
pub fn write_steering_audit(path: &Path, report: &SteeringReport) -> Result<()> {
    let mut out = String::new();
    for case in &report.per_case {
        out.push_str(&serde_json::to_string(case)?);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
