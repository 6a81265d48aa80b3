use std::collections::BTreeSet;

use num_bigint::BigInt;

use super::names::NameMap;
use super::protect::is_lit;
use crate::sexpr::{print_term, Term};
use crate::vc::free_symbols;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Iff,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "==>",
            BinOp::Iff => "<==>",
        }
    }

    pub const ALL: [BinOp; 15] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Mod,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::And,
        BinOp::Or,
        BinOp::Implies,
        BinOp::Iff,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

/// Display-only source-level formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DafnyExpr {
    Var(String),
    IntConst(BigInt),
    BoolConst(bool),
    BinOp(BinOp, Box<DafnyExpr>, Box<DafnyExpr>),
    UnOp(UnOp, Box<DafnyExpr>),
    Ite(Box<DafnyExpr>, Box<DafnyExpr>, Box<DafnyExpr>),
}

impl DafnyExpr {
    pub fn var(name: impl Into<String>) -> Self {
        DafnyExpr::Var(name.into())
    }

    pub fn int(v: impl Into<BigInt>) -> Self {
        DafnyExpr::IntConst(v.into())
    }

    pub fn bin(op: BinOp, l: DafnyExpr, r: DafnyExpr) -> Self {
        DafnyExpr::BinOp(op, Box::new(l), Box::new(r))
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            DafnyExpr::Var(v) => {
                out.insert(v.clone());
            }
            DafnyExpr::IntConst(_) | DafnyExpr::BoolConst(_) => {}
            DafnyExpr::BinOp(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            DafnyExpr::UnOp(_, a) => a.collect_vars(out),
            DafnyExpr::Ite(c, t, e) => {
                c.collect_vars(out);
                t.collect_vars(out);
                e.collect_vars(out);
            }
        }
    }
}

/// Outcome of rewriting one solver term for display.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Display {
    /// Translation artifact; hidden from the user.
    Suppressed,
    Expr(DafnyExpr),
}

/// A displayed formula: a source-level expression, or raw SMT text when the
/// term is outside the supported fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shown {
    Expr(DafnyExpr),
    Raw {
        text: String,
        idents: BTreeSet<String>,
    },
}

impl Shown {
    pub fn raw(t: &Term, names: &NameMap) -> Shown {
        let idents = free_symbols(t)
            .iter()
            .map(|s| names.display_name(s).to_string())
            .collect();
        Shown::Raw {
            text: print_term(t),
            idents,
        }
    }

    pub fn idents(&self) -> BTreeSet<String> {
        match self {
            Shown::Expr(e) => {
                let mut out = BTreeSet::new();
                e.collect_vars(&mut out);
                out
            }
            Shown::Raw { idents, .. } => idents.clone(),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Shown::Expr(e) => pretty_print(e),
            Shown::Raw { text, .. } => text.clone(),
        }
    }
}

fn is_control_flow(t: &Term) -> bool {
    t.is_app_of("ControlFlow")
}

fn is_modifies_frame(t: &Term) -> bool {
    match t {
        Term::Symbol(s) | Term::QuotedSymbol(s) => s.starts_with("$_ModifiesFrame"),
        _ => t
            .as_app()
            .is_some_and(|(h, _)| h.starts_with("$_ModifiesFrame")),
    }
}

fn is_suppressed(t: &Term) -> bool {
    match t.as_app() {
        Some(("$IsGoodHeap" | "$IsHeapAnchor", _)) => true,
        Some(("=", [l, r])) => {
            is_control_flow(l) || is_control_flow(r) || is_modifies_frame(l) || is_modifies_frame(r)
        }
        Some((h, _)) => h.starts_with("$_ModifiesFrame"),
        None => false,
    }
}

/// Rewrites a protection-stripped term into source syntax, or returns `None`
/// when it falls outside the supported fragment.
pub fn display_rewrite(t: &Term, names: &NameMap) -> Option<Display> {
    if is_suppressed(t) {
        return Some(Display::Suppressed);
    }
    to_expr(t, names).map(Display::Expr)
}

fn fold_left(op: BinOp, args: &[Term], names: &NameMap) -> Option<DafnyExpr> {
    let mut it = args.iter();
    let mut acc = to_expr(it.next()?, names)?;
    for a in it {
        acc = DafnyExpr::bin(op, acc, to_expr(a, names)?);
    }
    Some(acc)
}

fn binary(op: BinOp, args: &[Term], names: &NameMap) -> Option<DafnyExpr> {
    match args {
        [l, r] => Some(DafnyExpr::bin(op, to_expr(l, names)?, to_expr(r, names)?)),
        _ => None,
    }
}

fn to_expr(t: &Term, names: &NameMap) -> Option<DafnyExpr> {
    match t {
        Term::Symbol(s) | Term::QuotedSymbol(s) => Some(DafnyExpr::Var(names.display_name(s).to_string())),
        Term::IntLit(n) => Some(DafnyExpr::IntConst(n.clone())),
        Term::BoolLit(b) => Some(DafnyExpr::BoolConst(*b)),
        Term::App(..) => {
            let (head, args) = t.as_app()?;
            match (head, args) {
                (h, [inner]) if is_lit(h) => to_expr(inner, names),
                ("Mul" | "*", _) if args.len() >= 2 => fold_left(BinOp::Mul, args, names),
                ("+" | "Add", _) if args.len() >= 2 => fold_left(BinOp::Add, args, names),
                ("-", [a]) => Some(DafnyExpr::UnOp(UnOp::Neg, Box::new(to_expr(a, names)?))),
                ("-" | "Sub", _) if args.len() >= 2 => fold_left(BinOp::Sub, args, names),
                ("Div" | "div", _) => binary(BinOp::Div, args, names),
                ("Mod" | "mod", _) => binary(BinOp::Mod, args, names),
                ("=", [l, r]) => {
                    let (l, r) = (to_expr(l, names)?, to_expr(r, names)?);
                    let op = if is_boolean_shaped(&l) || is_boolean_shaped(&r) {
                        BinOp::Iff
                    } else {
                        BinOp::Eq
                    };
                    Some(DafnyExpr::bin(op, l, r))
                }
                ("distinct", _) => binary(BinOp::Ne, args, names),
                ("<", _) => binary(BinOp::Lt, args, names),
                ("<=", _) => binary(BinOp::Le, args, names),
                (">", _) => binary(BinOp::Gt, args, names),
                (">=", _) => binary(BinOp::Ge, args, names),
                ("and", _) if args.len() >= 2 => fold_left(BinOp::And, args, names),
                ("or", _) if args.len() >= 2 => fold_left(BinOp::Or, args, names),
                ("=>", _) if args.len() >= 2 => {
                    let (last, init) = args.split_last()?;
                    let mut acc = to_expr(last, names)?;
                    for a in init.iter().rev() {
                        acc = DafnyExpr::bin(BinOp::Implies, to_expr(a, names)?, acc);
                    }
                    Some(acc)
                }
                ("not", [inner]) => match inner.as_app() {
                    Some(("=", [l, r])) => Some(DafnyExpr::bin(
                        BinOp::Ne,
                        to_expr(l, names)?,
                        to_expr(r, names)?,
                    )),
                    _ => Some(DafnyExpr::UnOp(UnOp::Not, Box::new(to_expr(inner, names)?))),
                },
                ("ite", [c, a, b]) => Some(DafnyExpr::Ite(
                    Box::new(to_expr(c, names)?),
                    Box::new(to_expr(a, names)?),
                    Box::new(to_expr(b, names)?),
                )),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Equalities between formulas are shown as `<==>`; a bare variable gives
/// no evidence either way and keeps `==`.
fn is_boolean_shaped(e: &DafnyExpr) -> bool {
    match e {
        DafnyExpr::BoolConst(_) | DafnyExpr::UnOp(UnOp::Not, _) => true,
        DafnyExpr::BinOp(op, ..) => !matches!(
            op,
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod
        ),
        DafnyExpr::Ite(_, a, b) => is_boolean_shaped(a) || is_boolean_shaped(b),
        _ => false,
    }
}

/// Drops hypotheses `v == e` whose variable is used nowhere else, repeating
/// until nothing changes.
pub fn eliminate_dead_definitions(mut hypotheses: Vec<Shown>, goal: &Shown) -> Vec<Shown> {
    loop {
        let idents: Vec<BTreeSet<String>> = hypotheses.iter().map(Shown::idents).collect();
        let goal_idents = goal.idents();
        let dead = hypotheses.iter().enumerate().position(|(i, h)| {
            let Shown::Expr(DafnyExpr::BinOp(BinOp::Eq | BinOp::Iff, lhs, _)) = h else {
                return false;
            };
            let DafnyExpr::Var(v) = lhs.as_ref() else {
                return false;
            };
            !goal_idents.contains(v)
                && idents
                    .iter()
                    .enumerate()
                    .all(|(j, ids)| j == i || !ids.contains(v))
        });
        match dead {
            Some(i) => {
                hypotheses.remove(i);
            }
            None => return hypotheses,
        }
    }
}

/// Fully parenthesised rendering.
pub fn pretty_print(e: &DafnyExpr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_expr(out: &mut String, e: &DafnyExpr) {
    match e {
        DafnyExpr::Var(v) => out.push_str(v),
        DafnyExpr::IntConst(n) => out.push_str(&n.to_string()),
        DafnyExpr::BoolConst(b) => out.push_str(if *b { "true" } else { "false" }),
        DafnyExpr::BinOp(op, l, r) => {
            out.push('(');
            write_expr(out, l);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, r);
            out.push(')');
        }
        DafnyExpr::UnOp(op, a) => {
            out.push(match op {
                UnOp::Neg => '-',
                UnOp::Not => '!',
            });
            // binary operators and conditionals already carry their parentheses
            let bare = match a.as_ref() {
                DafnyExpr::IntConst(n) => n.sign() != num_bigint::Sign::Minus,
                DafnyExpr::UnOp(..) => false,
                _ => true,
            };
            if bare {
                write_expr(out, a);
            } else {
                out.push('(');
                write_expr(out, a);
                out.push(')');
            }
        }
        DafnyExpr::Ite(c, t, f) => {
            out.push_str("(if ");
            write_expr(out, c);
            out.push_str(" then ");
            write_expr(out, t);
            out.push_str(" else ");
            write_expr(out, f);
            out.push(')');
        }
    }
}

/// Display forms for one obligation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisplayedObligation {
    pub hypotheses: Vec<Shown>,
    pub goal: Shown,
}

impl DisplayedObligation {
    pub fn hypothesis_lines(&self) -> Vec<String> {
        self.hypotheses.iter().map(Shown::render).collect()
    }

    pub fn goal_line(&self) -> String {
        self.goal.render()
    }
}

/// Display form of a single formula; raw SMT text outside the fragment.
pub fn show(t: &Term, names: &NameMap) -> Shown {
    match display_rewrite(t, names) {
        Some(Display::Expr(e)) => Shown::Expr(e),
        _ => Shown::raw(t, names),
    }
}

/// Applies the display rewrites, then dead-definition elimination.
pub fn display_obligation(hypotheses: &[Term], goal: &Term, names: &NameMap) -> DisplayedObligation {
    let shown_goal = show(goal, names);
    let shown = hypotheses
        .iter()
        .filter_map(|h| match display_rewrite(h, names) {
            Some(Display::Suppressed) => None,
            Some(Display::Expr(e)) => Some(Shown::Expr(e)),
            None => Some(Shown::raw(h, names)),
        })
        .collect();
    DisplayedObligation {
        hypotheses: eliminate_dead_definitions(shown, &shown_goal),
        goal: shown_goal,
    }
}
