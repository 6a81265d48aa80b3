use num_bigint::BigInt;

pub use crate::backtranslate::{BinOp, UnOp};

/// Source position. Spans never take part in equality, so trees that differ
/// only in layout compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Int(BigInt),
    Bool(bool),
    Str(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    SeqDisplay(Vec<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn int(v: impl Into<BigInt>) -> Self {
        Expr::Int(v.into())
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::Call(name.into(), args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Type {
    pub name: String,
    pub args: Vec<Type>,
}

impl Type {
    pub fn named(name: impl Into<String>) -> Self {
        Type {
            name: name.into(),
            args: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub attrs: Vec<Attribute>,
    pub expr: Expr,
    pub span: Span,
}

impl Clause {
    pub fn is_ipm(&self) -> bool {
        has_ipm(&self.attrs)
    }
}

pub(crate) fn has_ipm(attrs: &[Attribute]) -> bool {
    attrs.iter().any(|a| a.name == "ipm")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    VarDecl {
        name: String,
        ty: Option<Type>,
        init: Option<Expr>,
        span: Span,
    },
    Assert {
        attrs: Vec<Attribute>,
        expr: Expr,
        span: Span,
    },
    Assume {
        expr: Expr,
        span: Span,
    },
    If {
        cond: Expr,
        then: Vec<Stmt>,
        els: Option<Vec<Stmt>>,
        span: Span,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Lemma,
    Method,
    Function,
}

impl DeclKind {
    pub fn keyword(self) -> &'static str {
        match self {
            DeclKind::Lemma => "lemma",
            DeclKind::Method => "method",
            DeclKind::Function => "function",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    Stmts(Vec<Stmt>),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub kind: DeclKind,
    pub name: String,
    pub type_params: Vec<String>,
    pub params: Vec<Param>,
    /// Result type; functions only.
    pub result: Option<Type>,
    pub requires: Vec<Clause>,
    pub ensures: Vec<Clause>,
    pub body: Body,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceUnit {
    pub decls: Vec<Decl>,
}

impl SourceUnit {
    /// Number of `{:ipm}` annotations (ensures clauses and assertions).
    pub fn ipm_count(&self) -> usize {
        fn in_stmts(stmts: &[Stmt]) -> usize {
            stmts
                .iter()
                .map(|s| match s {
                    Stmt::Assert { attrs, .. } => usize::from(has_ipm(attrs)),
                    Stmt::If { then, els, .. } => {
                        in_stmts(then) + els.as_deref().map_or(0, in_stmts)
                    }
                    _ => 0,
                })
                .sum()
        }
        self.decls
            .iter()
            .map(|d| {
                let body = match &d.body {
                    Body::Stmts(s) => in_stmts(s),
                    Body::Expr(_) => 0,
                };
                d.ensures.iter().filter(|c| c.is_ipm()).count() + body
            })
            .sum()
    }
}
