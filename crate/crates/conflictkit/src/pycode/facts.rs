//! Call-site and operator extraction from Python source.

use std::collections::BTreeSet;

use rustpython_ast::{self as ast, Visitor};
use rustpython_parser::Parse;
use serde::{Deserialize, Serialize};

/// What a Python snippet observably uses: the names it calls and the
/// operator tokens it applies.
///
/// `functions` holds callee names only. A bare `len(x)` contributes
/// `len`; a method or qualified call `np.sum(x)` contributes `sum`.
/// Names that are merely referenced (passed around, assigned) do not
/// count as calls. `operators` holds surface lexemes: `+`, `==`,
/// `not`, `and`, `+=` and so on, with augmented assignments kept
/// distinct from their binary forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFacts {
    pub functions: BTreeSet<String>,
    pub operators: BTreeSet<String>,
    /// False when the source failed to parse; both sets are empty then.
    pub parse_ok: bool,
}

impl CodeFacts {
    pub fn uses_function(&self, name: &str) -> bool {
        self.functions.contains(name)
    }

    pub fn uses_operator(&self, lexeme: &str) -> bool {
        self.operators.contains(lexeme)
    }
}

/// Parses `code` and collects [`CodeFacts`]. Never errors: an
/// unparseable snippet yields empty sets with `parse_ok = false`, since
/// downstream categorization treats that as "mentions nothing".
pub fn extract_facts(code: &str) -> CodeFacts {
    let suite = match ast::Suite::parse(code, "<snippet>") {
        Ok(s) => s,
        Err(_) => {
            return CodeFacts {
                functions: BTreeSet::new(),
                operators: BTreeSet::new(),
                parse_ok: false,
            }
        }
    };
    let mut collector = FactsCollector {
        functions: BTreeSet::new(),
        operators: BTreeSet::new(),
    };
    for stmt in suite {
        collector.visit_stmt(stmt);
    }
    CodeFacts {
        functions: collector.functions,
        operators: collector.operators,
        parse_ok: true,
    }
}

struct FactsCollector {
    functions: BTreeSet<String>,
    operators: BTreeSet<String>,
}

impl Visitor for FactsCollector {
    fn visit_expr_call(&mut self, node: ast::ExprCall) {
        match node.func.as_ref() {
            ast::Expr::Name(name) => {
                self.functions.insert(name.id.to_string());
            }
            ast::Expr::Attribute(attr) => {
                self.functions.insert(attr.attr.to_string());
            }
            _ => {}
        }
        self.generic_visit_expr_call(node);
    }

    fn visit_expr_bin_op(&mut self, node: ast::ExprBinOp) {
        self.operators.insert(binop_lexeme(node.op).to_string());
        self.generic_visit_expr_bin_op(node);
    }

    fn visit_expr_unary_op(&mut self, node: ast::ExprUnaryOp) {
        self.operators.insert(unaryop_lexeme(node.op).to_string());
        self.generic_visit_expr_unary_op(node);
    }

    fn visit_expr_bool_op(&mut self, node: ast::ExprBoolOp) {
        self.operators.insert(boolop_lexeme(node.op).to_string());
        self.generic_visit_expr_bool_op(node);
    }

    fn visit_expr_compare(&mut self, node: ast::ExprCompare) {
        for op in &node.ops {
            self.operators.insert(cmpop_lexeme(*op).to_string());
        }
        self.generic_visit_expr_compare(node);
    }

    fn visit_stmt_aug_assign(&mut self, node: ast::StmtAugAssign) {
        self.operators.insert(augop_lexeme(node.op));
        self.generic_visit_stmt_aug_assign(node);
    }
}

pub(crate) fn binop_lexeme(op: ast::Operator) -> &'static str {
    use ast::Operator::*;
    match op {
        Add => "+",
        Sub => "-",
        Mult => "*",
        MatMult => "@",
        Div => "/",
        Mod => "%",
        Pow => "**",
        LShift => "<<",
        RShift => ">>",
        BitOr => "|",
        BitXor => "^",
        BitAnd => "&",
        FloorDiv => "//",
    }
}

pub(crate) fn unaryop_lexeme(op: ast::UnaryOp) -> &'static str {
    use ast::UnaryOp::*;
    match op {
        Invert => "~",
        Not => "not",
        UAdd => "+",
        USub => "-",
    }
}

pub(crate) fn boolop_lexeme(op: ast::BoolOp) -> &'static str {
    match op {
        ast::BoolOp::And => "and",
        ast::BoolOp::Or => "or",
    }
}

pub(crate) fn cmpop_lexeme(op: ast::CmpOp) -> &'static str {
    use ast::CmpOp::*;
    match op {
        Eq => "==",
        NotEq => "!=",
        Lt => "<",
        LtE => "<=",
        Gt => ">",
        GtE => ">=",
        Is => "is",
        IsNot => "is not",
        In => "in",
        NotIn => "not in",
    }
}

/// `x += 1` uses `+=`, not `+`; the two never alias each other.
pub(crate) fn augop_lexeme(op: ast::Operator) -> String {
    format!("{}=", binop_lexeme(op))
}
