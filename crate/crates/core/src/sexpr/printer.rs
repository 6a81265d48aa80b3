use std::fmt::Write;

use num_bigint::Sign;

use super::lexer::is_symbol_char;
use super::{Attr, AttrValue, Ident, Term};

const RESERVED: &[&str] = &["true", "false", "!", "let", "forall", "exists", "match", "par", "as"];

/// True when `name` cannot be written as a simple symbol.
pub fn needs_quoting(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return true;
    };
    if first.is_ascii_digit() || !name.chars().all(is_symbol_char) || RESERVED.contains(&name) {
        return true;
    }
    // `-12` would lex as a numeral.
    first == '-' && name.len() > 1 && name[1..].bytes().all(|b| b.is_ascii_digit())
}

/// Canonical single-space rendering of a term.
pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t);
    out
}

fn write_symbol(out: &mut String, name: &str, quoted: bool) {
    if quoted || needs_quoting(name) {
        out.push('|');
        out.push_str(name);
        out.push('|');
    } else {
        out.push_str(name);
    }
}

fn write_ident(out: &mut String, id: &Ident) {
    write_symbol(out, &id.name, id.quoted);
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Symbol(s) => write_symbol(out, s, false),
        Term::QuotedSymbol(s) => write_symbol(out, s, true),
        Term::IntLit(n) => {
            if n.sign() == Sign::Minus {
                let _ = write!(out, "(- {})", n.magnitude());
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Term::BoolLit(b) => out.push_str(if *b { "true" } else { "false" }),
        Term::StringLit(s) => {
            out.push('"');
            out.push_str(&s.replace('"', "\"\""));
            out.push('"');
        }
        Term::SpecConst(s) => out.push_str(s),
        Term::App(head, args) => {
            out.push('(');
            write_term(out, head);
            for a in args {
                out.push(' ');
                write_term(out, a);
            }
            out.push(')');
        }
        Term::Quantifier {
            kind,
            bindings,
            body,
            attributes,
        } => {
            out.push('(');
            out.push_str(kind.keyword());
            out.push_str(" (");
            for (i, b) in bindings.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push('(');
                write_ident(out, &b.name);
                out.push(' ');
                write_term(out, &b.sort);
                out.push(')');
            }
            out.push_str(") ");
            if attributes.is_empty() {
                write_term(out, body);
            } else {
                write_annotated(out, body, attributes);
            }
            out.push(')');
        }
        Term::Let { bindings, body } => {
            out.push_str("(let (");
            for (i, b) in bindings.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push('(');
                write_ident(out, &b.name);
                out.push(' ');
                write_term(out, &b.value);
                out.push(')');
            }
            out.push_str(") ");
            write_term(out, body);
            out.push(')');
        }
        Term::Annotated { body, attributes } => write_annotated(out, body, attributes),
    }
}

fn write_annotated(out: &mut String, body: &Term, attributes: &[Attr]) {
    out.push_str("(! ");
    write_term(out, body);
    for a in attributes {
        out.push(' ');
        out.push_str(&a.key);
        match &a.value {
            AttrValue::None => {}
            AttrValue::Term(v) => {
                out.push(' ');
                write_term(out, v);
            }
            AttrValue::List(items) => {
                out.push_str(" (");
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    write_term(out, v);
                }
                out.push(')');
            }
        }
    }
    out.push(')');
}

/// Collapses a raw command onto one line: comments dropped, whitespace runs
/// outside quoted symbols and strings replaced by one space.
pub fn single_line(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    let mut pending_space = false;
    while let Some(c) = chars.next() {
        match c {
            '|' | '"' => {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(c);
                for inner in chars.by_ref() {
                    out.push(inner);
                    if inner == c {
                        break;
                    }
                }
            }
            ';' => {
                for inner in chars.by_ref() {
                    if inner == '\n' {
                        break;
                    }
                }
                pending_space = true;
            }
            c if c.is_whitespace() => pending_space = true,
            c => {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(c);
            }
        }
    }
    out
}
