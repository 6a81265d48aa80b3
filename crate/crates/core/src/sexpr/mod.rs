//! SMT-LIB 2 terms and commands: lexing, parsing and printing.
//!
//! The representation keeps everything the solver needs to see again
//! (attributes, quoted symbol spelling, raw declaration text) so a script can
//! be replayed without loss.

mod lexer;
mod parser;
mod printer;

use num_bigint::BigInt;
use thiserror::Error;

pub use lexer::Pos;
pub use parser::{parse_script, parse_term};
pub use printer::{needs_quoting, print_term, single_line};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantifierKind {
    Forall,
    Exists,
}

impl QuantifierKind {
    pub fn keyword(self) -> &'static str {
        match self {
            QuantifierKind::Forall => "forall",
            QuantifierKind::Exists => "exists",
        }
    }
}

/// A bound name as written, remembering whether it was `|quoted|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ident {
    pub name: String,
    pub quoted: bool,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        let quoted = needs_quoting(&name);
        Ident { name, quoted }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SortedVar {
    pub name: Ident,
    /// Sorts are identifiers or applications; they share the term shape.
    pub sort: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LetBinding {
    pub name: Ident,
    pub value: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttrValue {
    None,
    Term(Term),
    /// Parenthesised value such as a `:pattern` term list.
    List(Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attr {
    /// Always starts with `:`.
    pub key: String,
    pub value: AttrValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Symbol(String),
    QuotedSymbol(String),
    IntLit(BigInt),
    BoolLit(bool),
    StringLit(String),
    /// Decimal, hexadecimal and binary constants, verbatim.
    SpecConst(String),
    /// Non-empty argument list; nullary applications are symbols.
    App(Box<Term>, Vec<Term>),
    Quantifier {
        kind: QuantifierKind,
        bindings: Vec<SortedVar>,
        body: Box<Term>,
        attributes: Vec<Attr>,
    },
    Let {
        bindings: Vec<LetBinding>,
        body: Box<Term>,
    },
    Annotated {
        body: Box<Term>,
        attributes: Vec<Attr>,
    },
}

impl Term {
    /// Symbol with quoting chosen from the name.
    pub fn sym(name: impl Into<String>) -> Term {
        let name = name.into();
        if needs_quoting(&name) {
            Term::QuotedSymbol(name)
        } else {
            Term::Symbol(name)
        }
    }

    pub fn int(v: impl Into<BigInt>) -> Term {
        Term::IntLit(v.into())
    }

    /// `(head args...)`, or the bare symbol when `args` is empty.
    pub fn app(head: impl Into<String>, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::sym(head)
        } else {
            Term::App(Box::new(Term::sym(head)), args)
        }
    }

    /// `(not t)`; a constructor, not an operator overload.
    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Term {
        Term::app("not", vec![t])
    }

    /// Name of a symbol, quoted or not.
    pub fn symbol_name(&self) -> Option<&str> {
        match self {
            Term::Symbol(s) | Term::QuotedSymbol(s) => Some(s),
            _ => None,
        }
    }

    /// Head symbol name and arguments of an application.
    pub fn as_app(&self) -> Option<(&str, &[Term])> {
        match self {
            Term::App(head, args) => head.symbol_name().map(|h| (h, args.as_slice())),
            _ => None,
        }
    }

    /// True for `(name ...)` applications with exactly this head.
    pub fn is_app_of(&self, name: &str) -> bool {
        matches!(self.as_app(), Some((h, _)) if h == name)
    }

    /// Number of nodes, used for inlining budgets.
    pub fn size(&self) -> usize {
        match self {
            Term::App(h, args) => 1 + h.size() + args.iter().map(Term::size).sum::<usize>(),
            Term::Quantifier { body, .. } | Term::Annotated { body, .. } => 1 + body.size(),
            Term::Let { bindings, body } => {
                1 + body.size() + bindings.iter().map(|b| b.value.size()).sum::<usize>()
            }
            _ => 1,
        }
    }

    /// Pre-order search.
    pub fn any(&self, pred: &mut impl FnMut(&Term) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Term::App(h, args) => h.any(pred) || args.iter().any(|a| a.any(pred)),
            Term::Quantifier { body, .. } | Term::Annotated { body, .. } => body.any(pred),
            Term::Let { bindings, body } => {
                bindings.iter().any(|b| b.value.any(pred)) || body.any(pred)
            }
            _ => false,
        }
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_term(self))
    }
}

/// A top-level declaration or definition, replayed to the solver verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    /// `declare-fun`, `declare-const`, `declare-sort`, `define-fun`, ...
    pub keyword: String,
    /// Name of the declared symbol or sort.
    pub name: String,
    /// Exact source text of the whole command.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Key includes the leading `:`; value is the raw source text.
    SetOption { key: String, value: String },
    Declare(Declaration),
    Assert(Term),
    Push(u32),
    Pop(u32),
    CheckSat,
    /// Anything else, as written.
    Other(String),
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Command::SetOption { key, value } if value.is_empty() => {
                write!(f, "(set-option {key})")
            }
            Command::SetOption { key, value } => write!(f, "(set-option {key} {value})"),
            Command::Declare(d) => f.write_str(&d.text),
            Command::Assert(t) => write!(f, "(assert {})", print_term(t)),
            Command::Push(n) => write!(f, "(push {n})"),
            Command::Pop(n) => write!(f, "(pop {n})"),
            Command::CheckSat => f.write_str("(check-sat)"),
            Command::Other(raw) => f.write_str(raw),
        }
    }
}
