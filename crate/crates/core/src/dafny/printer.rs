use std::fmt::Write;

use super::ast::*;

const RANK_ITE: u8 = 0;
const RANK_UNARY: u8 = 7;
const RANK_PRIMARY: u8 = 8;

fn rank(e: &Expr) -> u8 {
    match e {
        Expr::Ite(..) => RANK_ITE,
        Expr::Binary(op, ..) => op_rank(*op),
        Expr::Unary(..) => RANK_UNARY,
        // a negative literal is printed with a leading minus
        Expr::Int(n) if n.sign() == num_bigint::Sign::Minus => RANK_UNARY,
        _ => RANK_PRIMARY,
    }
}

fn op_rank(op: BinOp) -> u8 {
    match op {
        BinOp::Iff => 1,
        BinOp::Implies => 2,
        BinOp::And | BinOp::Or => 3,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
    }
}

/// Source rendering with the fewest parentheses that re-parse to the same
/// tree.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_child(out: &mut String, e: &Expr, min: u8, forbid: Option<BinOp>) {
    let clash = matches!((e, forbid), (Expr::Binary(op, ..), Some(f)) if *op == f);
    if rank(e) < min || clash {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_list(out: &mut String, items: &[Expr]) {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Var(v) => out.push_str(v),
        Expr::Int(n) => write!(out, "{n}").unwrap(),
        Expr::Bool(b) => write!(out, "{b}").unwrap(),
        Expr::Str(s) => write_string(out, s),
        Expr::Unary(op, inner) => {
            out.push_str(match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            });
            if matches!(inner.as_ref(), Expr::Int(_)) {
                // `-5` would read back as a literal
                out.push('(');
                write_expr(out, inner);
                out.push(')');
            } else {
                write_child(out, inner, RANK_UNARY, None);
            }
        }
        Expr::Binary(op, l, r) => {
            let k = op_rank(*op);
            let other = match op {
                BinOp::And => Some(BinOp::Or),
                BinOp::Or => Some(BinOp::And),
                _ => None,
            };
            let (lmin, rmin) = match op {
                BinOp::Implies => (k + 1, k),
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    (k + 1, k + 1)
                }
                _ => (k, k + 1),
            };
            write_child(out, l, lmin, other);
            write!(out, " {} ", op.symbol()).unwrap();
            write_child(out, r, rmin, other);
        }
        Expr::Ite(c, a, b) => {
            out.push_str("if ");
            write_expr(out, c);
            out.push_str(" then ");
            write_expr(out, a);
            out.push_str(" else ");
            write_expr(out, b);
        }
        Expr::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            write_list(out, args);
            out.push(')');
        }
        Expr::SeqDisplay(items) => {
            out.push('[');
            write_list(out, items);
            out.push(']');
        }
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            ch => out.push(ch),
        }
    }
    out.push('"');
}

fn write_type(out: &mut String, t: &Type) {
    out.push_str(&t.name);
    if !t.args.is_empty() {
        out.push('<');
        for (i, a) in t.args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_type(out, a);
        }
        out.push('>');
    }
}

fn write_attrs(out: &mut String, attrs: &[Attribute]) {
    for a in attrs {
        write!(out, "{{:{}", a.name).unwrap();
        if !a.args.is_empty() {
            out.push(' ');
            write_list(out, &a.args);
        }
        out.push_str("} ");
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    out.push_str("{\n");
    for s in stmts {
        write_stmt(out, s, depth + 1);
    }
    indent(out, depth);
    out.push('}');
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match s {
        Stmt::VarDecl { name, ty, init, .. } => {
            write!(out, "var {name}").unwrap();
            if let Some(t) = ty {
                out.push_str(": ");
                write_type(out, t);
            }
            if let Some(e) = init {
                out.push_str(" := ");
                write_expr(out, e);
            }
            out.push_str(";\n");
        }
        Stmt::Assert { attrs, expr, .. } => {
            out.push_str("assert ");
            write_attrs(out, attrs);
            write_expr(out, expr);
            out.push_str(";\n");
        }
        Stmt::Assume { expr, .. } => {
            out.push_str("assume ");
            write_expr(out, expr);
            out.push_str(";\n");
        }
        Stmt::If { .. } => {
            write_if(out, s, depth);
            out.push('\n');
        }
    }
}

fn write_if(out: &mut String, s: &Stmt, depth: usize) {
    let Stmt::If { cond, then, els, .. } = s else {
        unreachable!()
    };
    out.push_str("if ");
    write_expr(out, cond);
    out.push(' ');
    write_block(out, then, depth);
    match els.as_deref() {
        None => {}
        Some([nested @ Stmt::If { .. }]) => {
            out.push_str(" else ");
            write_if(out, nested, depth);
        }
        Some(stmts) => {
            out.push_str(" else ");
            write_block(out, stmts, depth);
        }
    }
}

fn write_decl(out: &mut String, d: &Decl) {
    write!(out, "{} {}", d.kind.keyword(), d.name).unwrap();
    if !d.type_params.is_empty() {
        write!(out, "<{}>", d.type_params.join(", ")).unwrap();
    }
    out.push('(');
    for (i, p) in d.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{}: ", p.name).unwrap();
        write_type(out, &p.ty);
    }
    out.push(')');
    if let Some(t) = &d.result {
        out.push_str(": ");
        write_type(out, t);
    }
    out.push('\n');
    for (kw, clauses) in [("requires", &d.requires), ("ensures", &d.ensures)] {
        for c in clauses {
            write!(out, "  {kw} ").unwrap();
            write_attrs(out, &c.attrs);
            write_expr(out, &c.expr);
            out.push('\n');
        }
    }
    match &d.body {
        Body::Expr(e) => {
            out.push_str("{ ");
            write_expr(out, e);
            out.push_str(" }");
        }
        Body::Stmts(stmts) => write_block(out, stmts, 0),
    }
    out.push('\n');
}

pub fn print_program(unit: &SourceUnit) -> String {
    let mut out = String::new();
    for (i, d) in unit.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_decl(&mut out, d);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse_expression, parse_program};
    use super::*;

    #[test]
    fn minimal_parentheses() {
        for src in [
            "x * (x + 1) % 2 == 0",
            "a ==> b ==> c",
            "(a ==> b) ==> c",
            "x - (y - z)",
            "x - y - z",
            "(a && b) || c",
            "a && (b && c)",
            "-x * y",
            "-(x * y)",
            "-(5)",
            "-5 + x",
            "x - -5",
            "!(a && b)",
            "(if a then 1 else 2) + 3",
            "if a then 1 else 2 + 3",
            "f(x, \"q\\\"\", [g(y)])",
            "(a <==> b) <==> c",
            "a <==> (b <==> c)",
        ] {
            let e = parse_expression(src).unwrap();
            let printed = print_expr(&e);
            let expected = match src {
                "(a <==> b) <==> c" => "a <==> b <==> c",
                other => other,
            };
            assert_eq!(printed, expected);
            assert_eq!(parse_expression(&printed).unwrap(), e);
        }
    }

    #[test]
    fn program_round_trip() {
        let src = "lemma L(x: int, b: bool)\n  requires x > 0\n  ensures {:ipm} x >= 0\n{\n  var y: int := x;\n  if y > 0 {\n    assert {:ipm} y > 0;\n  } else if b {\n    assume false;\n  } else {\n  }\n}\n";
        let unit = parse_program(src).unwrap();
        let printed = print_program(&unit);
        assert_eq!(printed, src);
        assert_eq!(parse_program(&printed).unwrap(), unit);
    }
}
