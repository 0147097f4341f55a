//! Source-level mutations that realize a conflict context's claim.
//!
//! `mutate_deprecate` makes a deprecated function or operator actually
//! blow up at runtime, so code that still relies on it fails its tests.
//! `mutate_replace` undoes a rename, pointing call sites of the
//! advertised replacement back at the real implementation so that code
//! which followed the context can be executed at all.
//!
//! Both functions are textual rewrites guided by the AST: we parse to
//! find the sites, then splice replacement text into the original
//! source so untouched code keeps its exact bytes (comments,
//! formatting, string contents).

use rustpython_ast::{self as ast, Ranged, Visitor};
use rustpython_parser::Parse;

use super::facts::{augop_lexeme, binop_lexeme, boolop_lexeme, cmpop_lexeme, unaryop_lexeme};
use crate::error::{Error, Result};

const FN_SHIM_NAME: &str = "__kc_deprecated_fn";
const OP_SHIM_NAME: &str = "__kc_deprecated_op";

/// Whether a deprecation targets a callable name or an operator lexeme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Function,
    Operator,
}

/// Rewrites `code` so that any use of the deprecated `target` raises
/// `RuntimeError` at runtime.
///
/// For functions, a shim is bound over the name near the top of the
/// module (after any `from __future__` imports, which must stay first).
/// Rebinding catches aliases too: `f = len` grabs the shim, so a later
/// `f(xs)` raises just like `len(xs)` would. Code that never mentions
/// the name as a bare identifier is returned unchanged.
///
/// For operators, every expression using the lexeme is rewritten into a
/// call to a raising shim, outermost first, until none remain. Operand
/// text is preserved inside the call so evaluation order of the operands
/// themselves is kept; what is lost is short-circuiting of `and`/`or`
/// and the pairwise semantics of comparison chains, which is fine
/// because the shim raises before any result could be observed.
/// Augmented assignments are separate lexemes (`+=` is not `+`) and are
/// rewritten as `t = shim(t, v)` when targeted.
pub fn mutate_deprecate(code: &str, target: &str, kind: TargetKind) -> Result<String> {
    match kind {
        TargetKind::Function => deprecate_function(code, target),
        TargetKind::Operator => deprecate_operator(code, target),
    }
}

/// Renames call sites of `replacement` back to `original`, leaving
/// everything else (including non-call references) untouched. Returns
/// the input unchanged when `replacement` is never called.
pub fn mutate_replace(code: &str, replacement: &str, original: &str) -> Result<String> {
    ensure_identifier(original)?;
    ensure_identifier(replacement)?;
    let suite = parse_suite(code)?;
    let mut collector = CalleeSpans {
        name: replacement,
        src: code,
        spans: Vec::new(),
    };
    for stmt in suite {
        collector.visit_stmt(stmt);
    }
    if collector.spans.is_empty() {
        return Ok(code.to_string());
    }
    let mut out = code.to_string();
    collector.spans.sort_by_key(|&(start, _)| std::cmp::Reverse(start));
    for (start, end) in collector.spans {
        out.replace_range(start..end, original);
    }
    reparse_check(&out)?;
    Ok(out)
}

fn deprecate_function(code: &str, target: &str) -> Result<String> {
    ensure_identifier(target)?;
    let suite = parse_suite(code)?;
    let mut finder = NameFinder {
        target,
        found: false,
    };
    for stmt in &suite {
        if finder.found {
            break;
        }
        finder.visit_stmt(stmt.clone());
    }
    if !finder.found {
        return Ok(code.to_string());
    }
    let prologue = format!(
        "def {FN_SHIM_NAME}(*_args, **_kwargs):\n    raise RuntimeError(\"deprecated: {target}\")\n{target} = {FN_SHIM_NAME}\n"
    );
    let out = insert_prologue(code, &suite, &prologue);
    reparse_check(&out)?;
    Ok(out)
}

fn deprecate_operator(code: &str, lexeme: &str) -> Result<String> {
    let mut current = code.to_string();
    let mut rewrote_any = false;
    for _pass in 0..64 {
        let suite = parse_suite(&current)?;
        let mut collector = OpSites {
            lexeme,
            sites: Vec::new(),
        };
        for stmt in suite {
            collector.visit_stmt(stmt);
        }
        let sites = outermost(collector.sites);
        if sites.is_empty() {
            if !rewrote_any {
                return Ok(current);
            }
            let suite = parse_suite(&current)?;
            let prologue = format!(
                "def {OP_SHIM_NAME}(*_args, **_kwargs):\n    raise RuntimeError(\"deprecated operator: {lexeme}\")\n"
            );
            let out = insert_prologue(&current, &suite, &prologue);
            reparse_check(&out)?;
            return Ok(out);
        }
        rewrote_any = true;
        current = apply_op_rewrites(&current, sites)?;
    }
    Err(Error::MutationParse(format!(
        "operator rewrite for {lexeme:?} did not converge"
    )))
}

/// One expression or augmented assignment that uses the targeted
/// operator, with the operand ranges needed to rebuild it as a call.
enum Site {
    Expr {
        range: ast::text_size::TextRange,
        parts: Vec<ast::text_size::TextRange>,
    },
    Aug {
        range: ast::text_size::TextRange,
        target: ast::text_size::TextRange,
        value: ast::text_size::TextRange,
    },
}

impl Site {
    fn range(&self) -> ast::text_size::TextRange {
        match self {
            Site::Expr { range, .. } | Site::Aug { range, .. } => *range,
        }
    }
}

/// Keeps only sites not nested inside another site. Inner uses of the
/// operator survive inside the kept site's operand text and get picked
/// up on the next pass.
fn outermost(sites: Vec<Site>) -> Vec<Site> {
    let ranges: Vec<_> = sites.iter().map(Site::range).collect();
    sites
        .into_iter()
        .enumerate()
        .filter(|(i, site)| {
            let r = site.range();
            !ranges.iter().enumerate().any(|(j, outer)| {
                j != *i && outer.start() <= r.start() && r.end() <= outer.end() && *outer != r
            })
        })
        .map(|(_, site)| site)
        .collect()
}

fn apply_op_rewrites(src: &str, mut sites: Vec<Site>) -> Result<String> {
    sites.sort_by_key(|s| std::cmp::Reverse(usize::from(s.range().start())));
    let mut out = src.to_string();
    for site in sites {
        let (start, end) = span(src, site.range())?;
        let replacement = match &site {
            Site::Expr { parts, .. } => {
                let args: Vec<String> = parts
                    .iter()
                    .map(|p| {
                        let (ps, pe) = span(src, *p)?;
                        // Operands are passed parenthesized so tuples,
                        // lambdas, and conditionals stay single arguments.
                        Ok(format!("({})", &src[ps..pe]))
                    })
                    .collect::<Result<_>>()?;
                format!("{OP_SHIM_NAME}({})", args.join(", "))
            }
            Site::Aug { target, value, .. } => {
                let (ts, te) = span(src, *target)?;
                let (vs, ve) = span(src, *value)?;
                format!(
                    "{t} = {OP_SHIM_NAME}(({t}), ({v}))",
                    t = &src[ts..te],
                    v = &src[vs..ve]
                )
            }
        };
        out.replace_range(start..end, &replacement);
    }
    Ok(out)
}

struct OpSites<'a> {
    lexeme: &'a str,
    sites: Vec<Site>,
}

impl Visitor for OpSites<'_> {
    fn visit_expr_bin_op(&mut self, node: ast::ExprBinOp) {
        if binop_lexeme(node.op) == self.lexeme {
            self.sites.push(Site::Expr {
                range: node.range,
                parts: vec![node.left.range(), node.right.range()],
            });
        }
        self.generic_visit_expr_bin_op(node);
    }

    fn visit_expr_unary_op(&mut self, node: ast::ExprUnaryOp) {
        if unaryop_lexeme(node.op) == self.lexeme {
            self.sites.push(Site::Expr {
                range: node.range,
                parts: vec![node.operand.range()],
            });
        }
        self.generic_visit_expr_unary_op(node);
    }

    fn visit_expr_bool_op(&mut self, node: ast::ExprBoolOp) {
        if boolop_lexeme(node.op) == self.lexeme {
            self.sites.push(Site::Expr {
                range: node.range,
                parts: node.values.iter().map(Ranged::range).collect(),
            });
        }
        self.generic_visit_expr_bool_op(node);
    }

    fn visit_expr_compare(&mut self, node: ast::ExprCompare) {
        // A chain like `a < b == c` is one node; if any link uses the
        // lexeme the whole chain becomes a single shim call.
        if node.ops.iter().any(|op| cmpop_lexeme(*op) == self.lexeme) {
            let mut parts = vec![node.left.range()];
            parts.extend(node.comparators.iter().map(Ranged::range));
            self.sites.push(Site::Expr {
                range: node.range,
                parts,
            });
        }
        self.generic_visit_expr_compare(node);
    }

    fn visit_stmt_aug_assign(&mut self, node: ast::StmtAugAssign) {
        if augop_lexeme(node.op) == self.lexeme {
            self.sites.push(Site::Aug {
                range: node.range,
                target: node.target.range(),
                value: node.value.range(),
            });
        }
        self.generic_visit_stmt_aug_assign(node);
    }
}

struct NameFinder<'a> {
    target: &'a str,
    found: bool,
}

impl Visitor for NameFinder<'_> {
    fn visit_expr_name(&mut self, node: ast::ExprName) {
        if node.id.as_str() == self.target {
            self.found = true;
        }
        self.generic_visit_expr_name(node);
    }
}

struct CalleeSpans<'a> {
    name: &'a str,
    src: &'a str,
    spans: Vec<(usize, usize)>,
}

impl Visitor for CalleeSpans<'_> {
    fn visit_expr_call(&mut self, node: ast::ExprCall) {
        match node.func.as_ref() {
            ast::Expr::Name(name) if name.id.as_str() == self.name => {
                if let Ok((start, end)) = span(self.src, name.range) {
                    if &self.src[start..end] == self.name {
                        self.spans.push((start, end));
                    }
                }
            }
            ast::Expr::Attribute(attr) if attr.attr.as_str() == self.name => {
                if let Some(found) = attr_token_span(self.src, attr) {
                    self.spans.push(found);
                }
            }
            _ => {}
        }
        self.generic_visit_expr_call(node);
    }
}

/// Locates the attribute name token inside an attribute expression.
/// The node's range covers `value.attr` but the `attr` identifier has
/// no range of its own, so we scan backwards from the node's end; the
/// attribute token is the last identifier in the node.
fn attr_token_span(src: &str, node: &ast::ExprAttribute) -> Option<(usize, usize)> {
    let (_, node_end) = span(src, node.range).ok()?;
    let (_, value_end) = span(src, node.value.range()).ok()?;
    let name = node.attr.as_str();
    let region = &src[value_end..node_end];
    let mut upto = region.len();
    while let Some(rel) = region[..upto].rfind(name) {
        let start = value_end + rel;
        let end = start + name.len();
        if is_ident_boundary(src, start, end) {
            return Some((start, end));
        }
        if rel == 0 {
            break;
        }
        upto = rel;
    }
    None
}

fn is_ident_boundary(src: &str, start: usize, end: usize) -> bool {
    let bytes = src.as_bytes();
    let ident_byte = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let before_ok = start == 0 || !ident_byte(bytes[start - 1]);
    let after_ok = end >= bytes.len() || !ident_byte(bytes[end]);
    before_ok && after_ok
}

fn parse_suite(code: &str) -> Result<ast::Suite> {
    ast::Suite::parse(code, "<snippet>")
        .map_err(|e| Error::MutationParse(format!("cannot parse source: {e}")))
}

fn reparse_check(code: &str) -> Result<()> {
    ast::Suite::parse(code, "<mutated>")
        .map(|_| ())
        .map_err(|e| Error::MutationParse(format!("mutation produced unparseable code: {e}")))
}

fn ensure_identifier(name: &str) -> Result<()> {
    let mut chars = name.chars();
    let head_ok = chars
        .next()
        .map(|c| c.is_ascii_alphabetic() || c == '_')
        .unwrap_or(false);
    if head_ok && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(())
    } else {
        Err(Error::MutationParse(format!(
            "{name:?} is not a usable Python identifier"
        )))
    }
}

fn span(src: &str, range: ast::text_size::TextRange) -> Result<(usize, usize)> {
    let start = usize::from(range.start());
    let end = usize::from(range.end());
    if start <= end
        && end <= src.len()
        && src.is_char_boundary(start)
        && src.is_char_boundary(end)
    {
        Ok((start, end))
    } else {
        Err(Error::MutationParse(format!(
            "node range {start}..{end} does not address the source text"
        )))
    }
}

/// Splices `prologue` into `code` after any leading `from __future__`
/// imports, which Python requires to precede all other statements.
fn insert_prologue(code: &str, suite: &[ast::Stmt], prologue: &str) -> String {
    let mut insert_at = 0usize;
    for stmt in suite {
        match stmt {
            ast::Stmt::ImportFrom(imp)
                if imp.module.as_ref().map(ast::Identifier::as_str) == Some("__future__") =>
            {
                let end = usize::from(imp.range.end());
                insert_at = match code[end..].find('\n') {
                    Some(off) => end + off + 1,
                    None => code.len(),
                };
            }
            _ => break,
        }
    }
    let mut out = String::with_capacity(code.len() + prologue.len() + 1);
    out.push_str(&code[..insert_at]);
    if insert_at > 0 && !out.ends_with('\n') {
        out.push('\n');
    }
    out.push_str(prologue);
    out.push_str(&code[insert_at..]);
    out
}
