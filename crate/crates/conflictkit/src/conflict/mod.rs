//! Queries, parametric-knowledge elicitation, and conflict construction.

pub mod corpus;
pub mod sample;
pub mod templates;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::backend::ModelBackend;
use crate::error::{Error, Result};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Wc,
    Ow,
    Hep,
    Mbppp,
}

impl TaskKind {
    pub fn is_code(self) -> bool {
        matches!(self, TaskKind::Hep | TaskKind::Mbppp)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "wc" => Ok(TaskKind::Wc),
            "ow" => Ok(TaskKind::Ow),
            "hep" => Ok(TaskKind::Hep),
            "mbppp" => Ok(TaskKind::Mbppp),
            other => Err(Error::Config(format!(
                "unknown task `{other}` (expected wc, ow, hep, or mbppp)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Wc => "wc",
            TaskKind::Ow => "ow",
            TaskKind::Hep => "hep",
            TaskKind::Mbppp => "mbppp",
        }
    }
}

/// A single question or code problem fed to the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub task: TaskKind,
    /// The text handed to the model when eliciting parametric knowledge.
    pub text: String,
    /// Task-specific fields: country/capital, the six Olympics columns, or a
    /// code problem's test-suite reference.
    pub meta: BTreeMap<String, String>,
}

/// Decoding settings recorded beside every generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecodeParams {
    pub max_new_tokens: usize,
    pub temperature: f64,
    pub seed: u64,
    pub stop_sequences: Vec<String>,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self {
            max_new_tokens: 64,
            temperature: 0.0,
            seed: 0,
            stop_sequences: Vec::new(),
        }
    }
}

/// The model's answer to a bare query, plus the span we extracted from it.
/// `pk_extracted` is `None` when no answer span or code block could be
/// isolated; the record is kept so the failure stays visible downstream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PKRecord {
    pub query_id: String,
    pub pk_answer: String,
    pub pk_extracted: Option<String>,
    pub decode_params: DecodeParams,
}

impl PKRecord {
    pub fn extraction_failed(&self) -> bool {
        self.pk_extracted.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementKind {
    Default,
    Time,
    Endorsement,
    TimeEndorsement,
}

impl StatementKind {
    pub const ALL: [StatementKind; 4] = [
        StatementKind::Default,
        StatementKind::Time,
        StatementKind::Endorsement,
        StatementKind::TimeEndorsement,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(StatementKind::Default),
            "time" => Ok(StatementKind::Time),
            "endorsement" => Ok(StatementKind::Endorsement),
            "time_endorsement" => Ok(StatementKind::TimeEndorsement),
            other => Err(Error::Config(format!("unknown statement kind `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StatementKind::Default => "default",
            StatementKind::Time => "time",
            StatementKind::Endorsement => "endorsement",
            StatementKind::TimeEndorsement => "time_endorsement",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeConflictKind {
    FnDeprecate,
    FnReplace,
    OpDeprecate,
}

impl CodeConflictKind {
    pub const ALL: [CodeConflictKind; 3] = [
        CodeConflictKind::FnDeprecate,
        CodeConflictKind::FnReplace,
        CodeConflictKind::OpDeprecate,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "function_deprecate" => Ok(CodeConflictKind::FnDeprecate),
            "function_replace" => Ok(CodeConflictKind::FnReplace),
            "operator_deprecate" => Ok(CodeConflictKind::OpDeprecate),
            other => Err(Error::Config(format!("unknown code conflict kind `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CodeConflictKind::FnDeprecate => "function_deprecate",
            CodeConflictKind::FnReplace => "function_replace",
            CodeConflictKind::OpDeprecate => "operator_deprecate",
        }
    }

    /// True for the kinds whose target is an operator lexeme.
    pub fn targets_operator(self) -> bool {
        matches!(self, CodeConflictKind::OpDeprecate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntroKind {
    Default,
    Imagination,
    Update,
}

impl IntroKind {
    pub const ALL: [IntroKind; 3] = [
        IntroKind::Default,
        IntroKind::Imagination,
        IntroKind::Update,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(IntroKind::Default),
            "imagination" => Ok(IntroKind::Imagination),
            "update" => Ok(IntroKind::Update),
            other => Err(Error::Config(format!("unknown intro kind `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IntroKind::Default => "default",
            IntroKind::Imagination => "imagination",
            IntroKind::Update => "update",
        }
    }
}

/// Which template family produced a conflict context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum ConflictKind {
    Qa {
        statement: StatementKind,
    },
    Code {
        kind: CodeConflictKind,
        intro: IntroKind,
    },
}

impl ConflictKind {
    pub fn slug(&self) -> String {
        match self {
            ConflictKind::Qa { statement } => format!("qa-{}", statement.name()),
            ConflictKind::Code { kind, intro } => format!("{}-{}", kind.name(), intro.name()),
        }
    }
}

/// A conflicting context c' rendered from one of the fixed templates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictContext {
    pub kind: ConflictKind,
    /// The exact template output; prepended to the query to form the prompt.
    pub text: String,
    /// QA: the conflicting entity. Code: the targeted function or operator
    /// (for replacements the replacement name lives in `template_fill`).
    pub ck_payload: String,
    pub template_fill: BTreeMap<String, String>,
}

impl ConflictContext {
    /// Replacement name (`new_<function>`) for function-replacement
    /// conflicts, `None` otherwise.
    pub fn replacement(&self) -> Option<&str> {
        match self.kind {
            ConflictKind::Code {
                kind: CodeConflictKind::FnReplace,
                ..
            } => self.template_fill.get("replacement").map(String::as_str),
            _ => None,
        }
    }
}

/// One experimental unit: a query, its parametric answer, and a conflicting
/// context, with the combined prompt precomputed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConflictCase {
    pub query: Query,
    pub pk: PKRecord,
    pub context: ConflictContext,
    pub prompt_text: String,
}

impl ConflictCase {
    /// Context and query joined with a single newline.
    pub fn join_prompt(context_text: &str, query_text: &str) -> String {
        format!("{context_text}\n{query_text}")
    }

    /// Stable identifier derived from the query, template family, and
    /// payload. Unique within a sampled set because payloads per query are
    /// distinct.
    pub fn case_id(&self) -> String {
        format!(
            "{}__{}__{}",
            self.query.id,
            self.context.kind.slug(),
            slug(&self.context.ck_payload)
        )
    }
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    let mut last_dash = true;
    for c in s.chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
            last_dash = false;
        } else if !last_dash {
            out.push('-');
            last_dash = true;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        // Operator lexemes have no alphanumeric characters; hex-encode them.
        for b in s.bytes() {
            out.push_str(&format!("{b:02x}"));
        }
    }
    out
}

/// Asks the backend the bare query and extracts the answer span (QA) or code
/// block (code tasks). Extraction failure is recorded, not fatal.
pub fn elicit_pk(
    backend: &dyn ModelBackend,
    query: &Query,
    params: &DecodeParams,
) -> Result<PKRecord> {
    let answer = backend.generate(&query.text, params)?;
    let extracted = if query.task.is_code() {
        extract_code_block(&answer)
    } else {
        text::first_nonempty_line(&answer).map(str::to_string)
    };
    Ok(PKRecord {
        query_id: query.id.clone(),
        pk_answer: answer,
        pk_extracted: extracted,
        decode_params: params.clone(),
    })
}

/// First fenced code block, or the whole text when it has no fences but is
/// non-empty (models running in code mode often emit bare code).
pub fn extract_code_block(answer: &str) -> Option<String> {
    if let Some(start) = answer.find("```") {
        let after = &answer[start + 3..];
        // Skip an optional language tag on the opening fence line.
        let body_start = after.find('\n').map(|i| i + 1).unwrap_or(0);
        let body = &after[body_start..];
        let end = body.find("```").unwrap_or(body.len());
        let block = body[..end].trim();
        if block.is_empty() {
            return None;
        }
        return Some(block.to_string());
    }
    let trimmed = answer.trim();
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed.to_string())
    }
}
