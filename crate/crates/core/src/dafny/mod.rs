//! The small source-language fragment the proof mode works with: lemmas and
//! methods over `int`/`nat`/`bool`, their contracts, and straight-line
//! bodies with assertions and conditionals.

mod ast;
mod instrument;
mod lexer;
mod lower;
mod parser;
mod printer;

use thiserror::Error;

pub use ast::{
    Attribute, BinOp, Body, Clause, Decl, DeclKind, Expr, Param, SourceUnit, Span, Stmt, Type,
    UnOp,
};
pub use instrument::{
    instrument, instrument_unit, strip_instrumentation, visible_variables, GHOST_FUNCTIONS,
    PROTECT, PROTECT_SCOPE, PROTECT_TO_PROVE,
};
pub use lower::{lower_expr, parse_tactic_expr, ExprError};
pub use parser::{parse_expression, parse_program};
pub use printer::{print_expr, print_program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DafnyError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unsupported construct `{construct}`")]
    Unsupported {
        line: usize,
        col: usize,
        construct: String,
    },
    #[error("{line}:{col}: identifier `{name}` uses the reserved `_` prefix")]
    ReservedIdentifier {
        line: usize,
        col: usize,
        name: String,
    },
}

impl DafnyError {
    pub(crate) fn syntax(span: Span, message: impl Into<String>) -> Self {
        DafnyError::Syntax {
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }

    pub(crate) fn unsupported(span: Span, construct: impl Into<String>) -> Self {
        DafnyError::Unsupported {
            line: span.line,
            col: span.col,
            construct: construct.into(),
        }
    }
}
