use super::ast::*;
use super::parser::parse_program;
use super::printer::{print_expr, print_program};
use super::DafnyError;

pub const PROTECT: &str = "_protect";
pub const PROTECT_SCOPE: &str = "_protectScope";
pub const PROTECT_TO_PROVE: &str = "_protectToProve";

/// Identity functions the instrumented program is prefixed with. The
/// verifier carries their calls through to the solver unchanged.
pub const GHOST_FUNCTIONS: &str = "\
function _protect<T>(x: T, name: string): T
  { x }
function _protectScope<T>(
  x: T, name: string): bool { true }
function _protectToProve<T>(
  x: T, name: string, scope: seq<bool>): T { x }
";

pub(crate) fn is_ghost_function(name: &str) -> bool {
    [PROTECT, PROTECT_SCOPE, PROTECT_TO_PROVE].contains(&name)
}

/// Parses, instruments and prints a program, ghost functions first.
pub fn instrument(src: &str) -> Result<String, DafnyError> {
    let unit = parse_program(src)?;
    if unit.ipm_count() == 0 {
        log::warn!("no {{:ipm}} annotation found; the verifier will not stop anywhere");
    }
    let out = instrument_unit(&unit);
    Ok(format!("{GHOST_FUNCTIONS}\n{}", print_program(&out)))
}

/// Protects every variable occurrence in contracts and assertions and wraps
/// each `{:ipm}` formula with its label and visible scope.
pub fn instrument_unit(unit: &SourceUnit) -> SourceUnit {
    let decls = unit
        .decls
        .iter()
        .filter(|d| !is_ghost_function(&d.name))
        .map(|d| {
            if d.kind == DeclKind::Function {
                return d.clone();
            }
            let params: Vec<String> = d.params.iter().map(|p| p.name.clone()).collect();
            let clause = |c: &Clause| Clause {
                attrs: c.attrs.clone(),
                expr: if c.is_ipm() {
                    to_prove(&c.expr, &params)
                } else {
                    protect(&c.expr)
                },
                span: c.span,
            };
            let body = match &d.body {
                Body::Stmts(stmts) => Body::Stmts(instrument_block(stmts, params.clone())),
                Body::Expr(e) => Body::Expr(e.clone()),
            };
            Decl {
                requires: d.requires.iter().map(clause).collect(),
                ensures: d.ensures.iter().map(clause).collect(),
                body,
                ..d.clone()
            }
        })
        .collect();
    SourceUnit { decls }
}

/// Adds a binding to an ordered scope. A redeclared name keeps the position
/// of its first declaration; the new binding simply replaces the old one.
fn declare(scope: &mut Vec<String>, name: &str) {
    if !scope.iter().any(|n| n == name) {
        scope.push(name.to_string());
    }
}

fn instrument_block(stmts: &[Stmt], mut scope: Vec<String>) -> Vec<Stmt> {
    let mut out = Vec::with_capacity(stmts.len());
    for s in stmts {
        out.push(match s {
            Stmt::VarDecl { name, .. } => {
                declare(&mut scope, name);
                s.clone()
            }
            Stmt::Assert { attrs, expr, span } => Stmt::Assert {
                attrs: attrs.clone(),
                expr: if has_ipm(attrs) {
                    to_prove(expr, &scope)
                } else {
                    protect(expr)
                },
                span: *span,
            },
            Stmt::Assume { .. } => s.clone(),
            Stmt::If {
                cond,
                then,
                els,
                span,
            } => Stmt::If {
                cond: cond.clone(),
                then: instrument_block(then, scope.clone()),
                els: els.as_ref().map(|b| instrument_block(b, scope.clone())),
                span: *span,
            },
        });
    }
    out
}

fn protect(e: &Expr) -> Expr {
    match e {
        Expr::Var(v) => Expr::call(PROTECT, vec![e.clone(), Expr::Str(v.clone())]),
        Expr::Int(_) | Expr::Bool(_) | Expr::Str(_) => e.clone(),
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(protect(a))),
        Expr::Binary(op, a, b) => Expr::bin(*op, protect(a), protect(b)),
        Expr::Ite(c, a, b) => Expr::Ite(
            Box::new(protect(c)),
            Box::new(protect(a)),
            Box::new(protect(b)),
        ),
        Expr::Call(f, args) => Expr::call(f.clone(), args.iter().map(protect).collect()),
        Expr::SeqDisplay(items) => Expr::SeqDisplay(items.iter().map(protect).collect()),
    }
}

fn to_prove(e: &Expr, scope: &[String]) -> Expr {
    let scope = scope
        .iter()
        .map(|v| Expr::call(PROTECT_SCOPE, vec![Expr::var(v.clone()), Expr::Str(v.clone())]))
        .collect();
    Expr::call(
        PROTECT_TO_PROVE,
        vec![protect(e), Expr::Str(print_expr(e)), Expr::SeqDisplay(scope)],
    )
}

/// The visible variables at each `{:ipm}` site, in textual order.
pub fn visible_variables(unit: &SourceUnit) -> Vec<Vec<String>> {
    fn walk(stmts: &[Stmt], mut scope: Vec<String>, out: &mut Vec<Vec<String>>) {
        for s in stmts {
            match s {
                Stmt::VarDecl { name, .. } => declare(&mut scope, name),
                Stmt::Assert { attrs, .. } if has_ipm(attrs) => out.push(scope.clone()),
                Stmt::If { then, els, .. } => {
                    walk(then, scope.clone(), out);
                    if let Some(b) = els {
                        walk(b, scope.clone(), out);
                    }
                }
                _ => {}
            }
        }
    }
    let mut out = Vec::new();
    for d in &unit.decls {
        let params: Vec<String> = d.params.iter().map(|p| p.name.clone()).collect();
        let targets = d.ensures.iter().filter(|c| c.is_ipm()).count();
        out.extend(std::iter::repeat_n(params.clone(), targets));
        if let Body::Stmts(stmts) = &d.body {
            walk(stmts, params, &mut out);
        }
    }
    out
}

/// Undoes instrumentation: drops the ghost functions and unwraps every
/// protection call.
pub fn strip_instrumentation(unit: &SourceUnit) -> SourceUnit {
    fn expr(e: &Expr) -> Expr {
        match e {
            Expr::Call(f, args) if (f == PROTECT || f == PROTECT_TO_PROVE) && !args.is_empty() => {
                expr(&args[0])
            }
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(expr(a))),
            Expr::Binary(op, a, b) => Expr::bin(*op, expr(a), expr(b)),
            Expr::Ite(c, a, b) => Expr::Ite(Box::new(expr(c)), Box::new(expr(a)), Box::new(expr(b))),
            Expr::Call(f, args) => Expr::call(f.clone(), args.iter().map(expr).collect()),
            Expr::SeqDisplay(items) => Expr::SeqDisplay(items.iter().map(expr).collect()),
            _ => e.clone(),
        }
    }
    fn stmts(ss: &[Stmt]) -> Vec<Stmt> {
        ss.iter()
            .map(|s| match s {
                Stmt::Assert { attrs, expr: e, span } => Stmt::Assert {
                    attrs: attrs.clone(),
                    expr: expr(e),
                    span: *span,
                },
                Stmt::If {
                    cond,
                    then,
                    els,
                    span,
                } => Stmt::If {
                    cond: cond.clone(),
                    then: stmts(then),
                    els: els.as_deref().map(stmts),
                    span: *span,
                },
                other => other.clone(),
            })
            .collect()
    }
    let clause = |c: &Clause| Clause {
        expr: expr(&c.expr),
        ..c.clone()
    };
    SourceUnit {
        decls: unit
            .decls
            .iter()
            .filter(|d| !is_ghost_function(&d.name))
            .map(|d| Decl {
                requires: d.requires.iter().map(clause).collect(),
                ensures: d.ensures.iter().map(clause).collect(),
                body: match &d.body {
                    Body::Stmts(s) => Body::Stmts(stmts(s)),
                    b => b.clone(),
                },
                ..d.clone()
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squash(s: &str) -> String {
        s.chars().filter(|c| !c.is_whitespace()).collect()
    }

    #[test]
    fn shadowing_example_matches_golden() {
        let src = include_str!("../../fixtures/example_shadowing.dfy");
        let golden = include_str!("../../fixtures/example_shadowing.expected.dfy");
        assert_eq!(squash(&instrument(src).unwrap()), squash(golden));
    }

    #[test]
    fn triangle_target() {
        let src = include_str!("../../fixtures/triangle_sum_even.dfy");
        let out = instrument(src).unwrap();
        assert!(squash(&out).contains(&squash(
            r#"ensures {:ipm} _protectToProve(_protect(x, "x") * (_protect(x, "x") + 1) % 2 == 0, "x * (x + 1) % 2 == 0", [_protectScope(x, "x")])"#
        )));
    }

    #[test]
    fn instrumented_output_reparses_and_strips_back() {
        for src in [
            include_str!("../../fixtures/example_shadowing.dfy"),
            include_str!("../../fixtures/triangle_sum_even.dfy"),
            include_str!("../../fixtures/placeholder.dfy"),
        ] {
            let original = parse_program(src).unwrap();
            let reparsed = parse_program(&instrument(src).unwrap()).unwrap();
            assert_eq!(strip_instrumentation(&reparsed), original);
        }
    }

    #[test]
    fn innermost_binding_keeps_first_position() {
        let unit = parse_program(
            "method M(a: int, b: int) { var c := 1; if a > 0 { var a := 2; var d := 3; assert {:ipm} a > 0; } assert {:ipm} c > 0; }",
        )
        .unwrap();
        assert_eq!(
            visible_variables(&unit),
            vec![vec!["a", "b", "c", "d"], vec!["a", "b", "c"]]
        );
    }
}
