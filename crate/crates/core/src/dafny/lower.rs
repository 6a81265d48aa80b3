use num_bigint::BigInt;
use thiserror::Error;

use super::ast::*;
use super::parser::parse_expression;
use super::DafnyError;
use crate::backtranslate::NameMap;
use crate::sexpr::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] DafnyError),
    #[error("unknown identifier `{name}`; known identifiers: {}", known.join(", "))]
    UnknownIdentifier { name: String, known: Vec<String> },
    #[error("`{name}` is ambiguous here; it may denote any of {}", candidates.join(", "))]
    Ambiguous {
        name: String,
        candidates: Vec<String>,
    },
    #[error("type error: {0}")]
    Type(String),
    #[error("{0} is not allowed in tactic formulas")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    /// A variable whose sort is not known here.
    Any,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Int => "int",
            Ty::Bool => "bool",
            Ty::Any => "any",
        }
    }

    fn fits(self, want: Ty) -> bool {
        self == Ty::Any || want == Ty::Any || self == want
    }

    fn join(self, other: Ty) -> Ty {
        if self == Ty::Any {
            other
        } else {
            self
        }
    }
}

/// Parses a tactic argument and lowers it to a solver term, using the same
/// encodings the verifier uses for the original program.
pub fn parse_tactic_expr(text: &str, names: &NameMap) -> Result<Term, ExprError> {
    let e = parse_expression(text)?;
    lower_expr(&e, names)
}

pub fn lower_expr(e: &Expr, names: &NameMap) -> Result<Term, ExprError> {
    let ty = type_of(e, names)?;
    if ty == Ty::Int {
        return Err(ExprError::Type("formula has type int, expected bool".into()));
    }
    lower(e, names)
}

fn expect(e: &Expr, want: Ty, names: &NameMap, what: &str) -> Result<Ty, ExprError> {
    let got = type_of(e, names)?;
    if !got.fits(want) {
        return Err(ExprError::Type(format!(
            "{what} expects {}, found {}",
            want.name(),
            got.name()
        )));
    }
    Ok(got)
}

fn type_of(e: &Expr, names: &NameMap) -> Result<Ty, ExprError> {
    Ok(match e {
        Expr::Var(v) => {
            resolve(v, names)?;
            Ty::Any
        }
        Expr::Int(_) => Ty::Int,
        Expr::Bool(_) => Ty::Bool,
        Expr::Str(_) => return Err(ExprError::Unsupported("a string literal".into())),
        Expr::Call(f, _) => return Err(ExprError::Unsupported(format!("calling `{f}`"))),
        Expr::SeqDisplay(_) => return Err(ExprError::Unsupported("a sequence display".into())),
        Expr::Unary(UnOp::Neg, a) => {
            expect(a, Ty::Int, names, "`-`")?;
            Ty::Int
        }
        Expr::Unary(UnOp::Not, a) => {
            expect(a, Ty::Bool, names, "`!`")?;
            Ty::Bool
        }
        Expr::Binary(op, a, b) => {
            let sym = format!("`{}`", op.symbol());
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
                    expect(a, Ty::Int, names, &sym)?;
                    expect(b, Ty::Int, names, &sym)?;
                    Ty::Int
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    expect(a, Ty::Int, names, &sym)?;
                    expect(b, Ty::Int, names, &sym)?;
                    Ty::Bool
                }
                BinOp::Eq | BinOp::Ne => {
                    let ta = type_of(a, names)?;
                    expect(b, ta, names, &sym)?;
                    Ty::Bool
                }
                BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff => {
                    expect(a, Ty::Bool, names, &sym)?;
                    expect(b, Ty::Bool, names, &sym)?;
                    Ty::Bool
                }
            }
        }
        Expr::Ite(c, a, b) => {
            expect(c, Ty::Bool, names, "`if` condition")?;
            let ta = type_of(a, names)?;
            let tb = expect(b, ta, names, "`else` branch")?;
            ta.join(tb)
        }
    })
}

fn resolve<'a>(v: &str, names: &'a NameMap) -> Result<&'a str, ExprError> {
    if let Some(smt) = names.resolve(v) {
        return Ok(smt);
    }
    let candidates = names.smt_names(v);
    if candidates.is_empty() {
        Err(ExprError::UnknownIdentifier {
            name: v.to_string(),
            known: names.known_names().into_iter().map(String::from).collect(),
        })
    } else {
        Err(ExprError::Ambiguous {
            name: v.to_string(),
            candidates: candidates.into_iter().map(String::from).collect(),
        })
    }
}

fn lit_int(n: &BigInt) -> Term {
    Term::app("LitInt", vec![Term::IntLit(n.clone())])
}

fn lower(e: &Expr, names: &NameMap) -> Result<Term, ExprError> {
    let bin = |head: &str, a: &Expr, b: &Expr| -> Result<Term, ExprError> {
        Ok(Term::app(head, vec![lower(a, names)?, lower(b, names)?]))
    };
    Ok(match e {
        Expr::Var(v) => Term::sym(resolve(v, names)?),
        Expr::Int(n) => lit_int(n),
        Expr::Bool(b) => Term::BoolLit(*b),
        Expr::Unary(UnOp::Neg, a) => match a.as_ref() {
            Expr::Int(n) => lit_int(&-n),
            a => Term::app("-", vec![lower(a, names)?]),
        },
        Expr::Unary(UnOp::Not, a) => Term::not(lower(a, names)?),
        Expr::Binary(op, a, b) => match op {
            BinOp::Add => bin("+", a, b)?,
            BinOp::Sub => bin("-", a, b)?,
            BinOp::Mul => bin("Mul", a, b)?,
            BinOp::Div => bin("Div", a, b)?,
            BinOp::Mod => bin("Mod", a, b)?,
            BinOp::Eq | BinOp::Iff => bin("=", a, b)?,
            BinOp::Ne => Term::not(bin("=", a, b)?),
            BinOp::Lt => bin("<", a, b)?,
            BinOp::Le => bin("<=", a, b)?,
            BinOp::Gt => bin(">", a, b)?,
            BinOp::Ge => bin(">=", a, b)?,
            BinOp::And => bin("and", a, b)?,
            BinOp::Or => bin("or", a, b)?,
            BinOp::Implies => bin("=>", a, b)?,
        },
        Expr::Ite(c, a, b) => Term::app(
            "ite",
            vec![lower(c, names)?, lower(a, names)?, lower(b, names)?],
        ),
        Expr::Str(_) | Expr::Call(..) | Expr::SeqDisplay(_) => {
            unreachable!("rejected by the type check")
        }
    })
}
