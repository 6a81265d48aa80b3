use num_traits::ToPrimitive;
use thiserror::Error;

use super::names::{NameMap, NameMapError};
use crate::sexpr::{print_term, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtectionError {
    #[error("`{head}` applied to {found} argument(s)")]
    Arity { head: String, found: usize },
    #[error("string literal: {0}")]
    StringLiteral(#[from] StringLiteralError),
    #[error(transparent)]
    Names(#[from] NameMapError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StringLiteralError {
    #[error("character code is not an integer literal: {0}")]
    NonLiteralChar(String),
    #[error("character code {0} is not a valid character")]
    InvalidCode(String),
    #[error("unexpected shape in sequence chain: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protection {
    Protect,
    Scope,
    ToProve,
}

impl Protection {
    /// Matches by demangled suffix; the module prefix varies between versions.
    pub fn of_head(name: &str) -> Option<Protection> {
        if name.ends_with("__protectToProve") {
            Some(Protection::ToProve)
        } else if name.ends_with("__protectScope") {
            Some(Protection::Scope)
        } else if name.ends_with("__protect") {
            Some(Protection::Protect)
        } else {
            None
        }
    }

    /// Trailing user arguments; up to two leading type/reveal arguments may precede them.
    fn user_arity(self) -> usize {
        match self {
            Protection::Protect | Protection::Scope => 2,
            Protection::ToProve => 3,
        }
    }
}

pub(crate) fn is_box(name: &str) -> bool {
    name.starts_with("$Box")
}

pub(crate) fn is_unbox(name: &str) -> bool {
    name.starts_with("$Unbox")
}

/// `LitInt`, `Lit`, `Lit_NNN` and similar literal markers.
pub(crate) fn is_lit(name: &str) -> bool {
    name == "Lit" || name == "LitInt" || name == "LitReal" || name.starts_with("Lit_")
}

fn protection_app(t: &Term) -> Option<(Protection, &str, &[Term])> {
    let (head, args) = t.as_app()?;
    Protection::of_head(head).map(|p| (p, head, args))
}

struct Parts<'a> {
    payload: &'a Term,
    name: &'a Term,
}

fn parts<'a>(kind: Protection, head: &str, args: &'a [Term]) -> Result<Parts<'a>, ProtectionError> {
    let n = kind.user_arity();
    if args.len() < n || args.len() > n + 2 {
        return Err(ProtectionError::Arity {
            head: head.to_string(),
            found: args.len(),
        });
    }
    let base = args.len() - n;
    Ok(Parts {
        payload: &args[base],
        name: &args[base + 1],
    })
}

fn unbox(t: &Term) -> &Term {
    match t.as_app() {
        Some((h, [inner])) if is_box(h) => inner,
        _ => t,
    }
}

fn unlit(mut t: &Term) -> &Term {
    while let Some((h, [inner])) = t.as_app() {
        if !is_lit(h) {
            break;
        }
        t = inner;
    }
    t
}

/// True when `t` contains a `_protectToProve` application at any depth.
pub fn contains_protect_to_prove(t: &Term) -> bool {
    t.any(&mut |s| {
        matches!(s.as_app(), Some((h, _)) if Protection::of_head(h) == Some(Protection::ToProve))
    })
}

/// Replaces every protection call (and its box/unbox wrapping) by its
/// payload. Scope markers become `true` and vanish from conjunctions.
pub fn strip_protections(t: &Term) -> Result<Term, ProtectionError> {
    Ok(match t {
        Term::App(head, args) => {
            let name = head.symbol_name();
            if let (Some(h), [inner]) = (name, args.as_slice()) {
                if is_unbox(h) {
                    if let Some((kind, ph, pargs)) = protection_app(inner) {
                        return strip_call(kind, ph, pargs);
                    }
                }
            }
            if let Some((kind, ph, pargs)) = protection_app(t) {
                return strip_call(kind, ph, pargs);
            }
            if name == Some("and") {
                let mut kept = Vec::new();
                for a in args {
                    if is_scope_marker(a) {
                        strip_protections(a)?;
                        continue;
                    }
                    kept.push(strip_protections(a)?);
                }
                return Ok(match kept.len() {
                    0 => Term::BoolLit(true),
                    1 => kept.pop().unwrap(),
                    _ => Term::App(head.clone(), kept),
                });
            }
            Term::App(
                Box::new(strip_protections(head)?),
                args.iter()
                    .map(strip_protections)
                    .collect::<Result<_, _>>()?,
            )
        }
        Term::Quantifier {
            kind,
            bindings,
            body,
            attributes,
        } => Term::Quantifier {
            kind: *kind,
            bindings: bindings.clone(),
            body: Box::new(strip_protections(body)?),
            attributes: attributes.clone(),
        },
        Term::Let { bindings, body } => Term::Let {
            bindings: bindings
                .iter()
                .map(|b| {
                    Ok(crate::sexpr::LetBinding {
                        name: b.name.clone(),
                        value: strip_protections(&b.value)?,
                    })
                })
                .collect::<Result<_, ProtectionError>>()?,
            body: Box::new(strip_protections(body)?),
        },
        Term::Annotated { body, attributes } => Term::Annotated {
            body: Box::new(strip_protections(body)?),
            attributes: attributes.clone(),
        },
        leaf => leaf.clone(),
    })
}

fn is_scope_marker(t: &Term) -> bool {
    let t = match t.as_app() {
        Some((h, [inner])) if is_unbox(h) => inner,
        _ => t,
    };
    matches!(protection_app(t), Some((Protection::Scope, _, _)))
}

fn strip_call(kind: Protection, head: &str, args: &[Term]) -> Result<Term, ProtectionError> {
    let p = parts(kind, head, args)?;
    if kind == Protection::Scope {
        return Ok(Term::BoolLit(true));
    }
    strip_protections(unbox(p.payload))
}

/// Collects the source/SMT identifier pairs recorded by protection calls.
pub fn build_name_map(t: &Term) -> Result<NameMap, ProtectionError> {
    let mut map = NameMap::new();
    extend_name_map(&mut map, t)?;
    Ok(map)
}

pub fn extend_name_map(map: &mut NameMap, t: &Term) -> Result<(), ProtectionError> {
    let mut err = None;
    t.any(&mut |s| {
        if let Some((kind, head, args)) = protection_app(s) {
            if let Err(e) = record(map, kind, head, args) {
                err = Some(e);
                return true;
            }
        }
        false
    });
    err.map_or(Ok(()), Err)
}

fn record(map: &mut NameMap, kind: Protection, head: &str, args: &[Term]) -> Result<(), ProtectionError> {
    if kind == Protection::ToProve {
        parts(kind, head, args)?;
        return Ok(());
    }
    let p = parts(kind, head, args)?;
    let Some(smt) = unbox(p.payload).symbol_name() else {
        return Ok(());
    };
    let dafny = decode_string_literal(p.name)?;
    map.insert(&dafny, smt, kind == Protection::Scope)?;
    Ok(())
}

/// The source text recorded by the first proof-target marker in `t`.
pub fn to_prove_label(t: &Term) -> Option<String> {
    let mut label = None;
    t.any(&mut |s| match protection_app(s) {
        Some((Protection::ToProve, head, args)) => {
            label = parts(Protection::ToProve, head, args)
                .ok()
                .and_then(|p| decode_string_literal(p.name).ok());
            true
        }
        _ => false,
    });
    label
}

/// Decodes a `Seq#Build` chain of `char#FromInt` codes into text.
pub fn decode_string_literal(t: &Term) -> Result<String, StringLiteralError> {
    let mut chars = Vec::new();
    let mut cur = unlit(t);
    loop {
        if cur.symbol_name() == Some("Seq#Empty") {
            break;
        }
        match cur.as_app() {
            Some(("Seq#Build", [rest, elem])) => {
                chars.push(decode_char(elem)?);
                cur = unlit(rest);
            }
            _ => return Err(StringLiteralError::Shape(print_term(cur))),
        }
    }
    chars.reverse();
    Ok(chars.into_iter().collect())
}

fn decode_char(elem: &Term) -> Result<char, StringLiteralError> {
    let elem = unlit(unbox(elem));
    let code = match elem.as_app() {
        Some(("char#FromInt", [code])) => unlit(code),
        _ => return Err(StringLiteralError::Shape(print_term(elem))),
    };
    let Term::IntLit(n) = code else {
        return Err(StringLiteralError::NonLiteralChar(print_term(code)));
    };
    n.to_u32()
        .and_then(char::from_u32)
        .ok_or_else(|| StringLiteralError::InvalidCode(n.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    /// Independent encoder: builds the chain from a code table.
    fn encode(text: &str) -> String {
        let mut chain = "|Seq#Empty|".to_string();
        for c in text.chars() {
            let code = c as u32;
            chain = format!("(|Seq#Build| {chain} ($Box_23439 (|char#FromInt| {code})))");
        }
        chain
    }

    #[test]
    fn decodes_single_x() {
        let chain = t("(|Seq#Build| |Seq#Empty| ($Box_23439 (|char#FromInt| 120)))");
        assert_eq!(decode_string_literal(&chain).unwrap(), "x");
    }

    #[test]
    fn decodes_empty_chain() {
        assert_eq!(decode_string_literal(&t("|Seq#Empty|")).unwrap(), "");
    }

    #[test]
    fn decodes_label_from_code_table() {
        let codes = [120, 32, 43, 32, 121, 32, 62, 32, 48];
        let mut chain = "|Seq#Empty|".to_string();
        for code in codes {
            chain = format!("(|Seq#Build| {chain} ($Box_23439 (|char#FromInt| {code})))");
        }
        assert_eq!(decode_string_literal(&t(&chain)).unwrap(), "x + y > 0");
        let label = "x * (x + 1) % 2 == 0";
        assert_eq!(decode_string_literal(&t(&encode(label))).unwrap(), label);
    }

    #[test]
    fn decode_errors() {
        let bad = t("(|Seq#Build| |Seq#Empty| ($Box_23439 (|char#FromInt| n)))");
        assert!(matches!(
            decode_string_literal(&bad),
            Err(StringLiteralError::NonLiteralChar(_))
        ));
        assert!(matches!(
            decode_string_literal(&t("(f a)")),
            Err(StringLiteralError::Shape(_))
        ));
    }

    const PROTECTED_X: &str = "($Unbox_995 (_module.__default.__protect TInt reveal__module._default._protect ($Box_577 |x#0@@1|) (Lit_25231 (|Seq#Build| |Seq#Empty| ($Box_23439 (|char#FromInt| 120))))))";

    #[test]
    fn strips_protect_with_box_pair() {
        assert_eq!(strip_protections(&t(PROTECTED_X)).unwrap(), t("|x#0@@1|"));
    }

    #[test]
    fn strip_is_identity_on_clean_terms() {
        let clean = t("(forall ((a Int)) (! (= (Mul a 2) (+ a a)) :pattern ((Mul a 2))))");
        assert_eq!(strip_protections(&clean).unwrap(), clean);
    }

    #[test]
    fn scope_conjuncts_disappear() {
        let scope = format!(
            "(_module.__default.__protectScope TInt reveal ($Box_577 |x#0@@1|) {})",
            encode("x")
        );
        assert_eq!(
            strip_protections(&t(&format!("(and {scope} p)"))).unwrap(),
            t("p")
        );
        assert_eq!(
            strip_protections(&t(&format!("(and {scope} {scope})"))).unwrap(),
            Term::BoolLit(true)
        );
    }

    #[test]
    fn bad_arity_is_reported() {
        let err = strip_protections(&t("(_module.__default.__protect x)")).unwrap_err();
        assert_eq!(
            err,
            ProtectionError::Arity {
                head: "_module.__default.__protect".into(),
                found: 1
            }
        );
    }

    #[test]
    fn name_map_from_protected_occurrence() {
        let map = build_name_map(&t(PROTECTED_X)).unwrap();
        assert_eq!(map.len(), 1);
        assert_eq!(map.entries()[0].dafny, "x");
        assert_eq!(map.entries()[0].smt, "x#0@@1");
        assert!(!map.entries()[0].in_scope);
    }

    #[test]
    fn empty_map_without_protections() {
        assert!(build_name_map(&t("(= (Mod a 2) 0)")).unwrap().is_empty());
    }

    #[test]
    fn conflicting_names_error() {
        let a = PROTECTED_X.to_string();
        let b = PROTECTED_X.replace("120", "121");
        let err = build_name_map(&t(&format!("(+ {a} {b})"))).unwrap_err();
        assert!(matches!(err, ProtectionError::Names(NameMapError::Conflict { .. })));
    }
}
