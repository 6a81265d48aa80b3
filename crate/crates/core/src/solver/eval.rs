use std::collections::{BTreeSet, HashMap};

use num_traits::ToPrimitive;

use crate::backtranslate::Protection;
use crate::sexpr::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i128),
    Bool(bool),
}

type Env = HashMap<String, Value>;

fn int(v: Value) -> Result<i128, String> {
    match v {
        Value::Int(i) => Ok(i),
        Value::Bool(_) => Err("expected an integer".into()),
    }
}

fn boolean(v: Value) -> Result<bool, String> {
    match v {
        Value::Bool(b) => Ok(b),
        Value::Int(_) => Err("expected a boolean".into()),
    }
}

fn euclid(a: i128, b: i128) -> Result<(i128, i128), String> {
    if b == 0 {
        return Err("division by zero".into());
    }
    let r = a.rem_euclid(b);
    Ok(((a - r) / b, r))
}

fn overflow() -> String {
    "integer overflow".into()
}

/// Evaluates a quantifier-free term with integer arithmetic under SMT-LIB
/// semantics (`div`/`mod` are Euclidean). The verifier's own wrappers
/// (`Mul`, `LitInt`, boxing, ...) are understood too.
pub fn eval(t: &Term, env: &Env) -> Result<Value, String> {
    match t {
        Term::IntLit(n) => n.to_i128().map(Value::Int).ok_or_else(overflow),
        Term::BoolLit(b) => Ok(Value::Bool(*b)),
        Term::Symbol(s) | Term::QuotedSymbol(s) => env
            .get(s)
            .copied()
            .ok_or_else(|| format!("unbound symbol `{s}`")),
        Term::Annotated { body, .. } => eval(body, env),
        Term::App(..) => {
            let (head, args) = t.as_app().expect("application");
            let ints = |args: &[Term]| -> Result<Vec<i128>, String> {
                args.iter().map(|a| eval(a, env).and_then(int)).collect()
            };
            let bools = |args: &[Term]| -> Result<Vec<bool>, String> {
                args.iter().map(|a| eval(a, env).and_then(boolean)).collect()
            };
            let pairwise = |args: &[Term], f: fn(i128, i128) -> bool| -> Result<Value, String> {
                let v = ints(args)?;
                Ok(Value::Bool(v.windows(2).all(|w| f(w[0], w[1]))))
            };
            match head {
                "LitInt" | "LitBool" => eval(single(args)?, env),
                h if h.starts_with("Lit_") || h.starts_with("$Box_") || h.starts_with("$Unbox_") => {
                    eval(single(args)?, env)
                }
                h if Protection::of_head(h).is_some() => {
                    Err(format!("protection call `{h}` in a solver-facing term"))
                }
                "+" | "Add" => ints(args)?
                    .into_iter()
                    .try_fold(0i128, |a, b| a.checked_add(b))
                    .map(Value::Int)
                    .ok_or_else(overflow),
                "*" | "Mul" => ints(args)?
                    .into_iter()
                    .try_fold(1i128, |a, b| a.checked_mul(b))
                    .map(Value::Int)
                    .ok_or_else(overflow),
                "-" | "Sub" => {
                    let v = ints(args)?;
                    match v.as_slice() {
                        [a] => a.checked_neg().map(Value::Int).ok_or_else(overflow),
                        [first, rest @ ..] if !rest.is_empty() => rest
                            .iter()
                            .try_fold(*first, |a, b| a.checked_sub(*b))
                            .map(Value::Int)
                            .ok_or_else(overflow),
                        _ => Err("`-` needs arguments".into()),
                    }
                }
                "div" | "Div" => {
                    let v = ints(args)?;
                    let [a, b] = v.as_slice() else {
                        return Err("div takes two arguments".into());
                    };
                    Ok(Value::Int(euclid(*a, *b)?.0))
                }
                "mod" | "Mod" => {
                    let v = ints(args)?;
                    let [a, b] = v.as_slice() else {
                        return Err("mod takes two arguments".into());
                    };
                    Ok(Value::Int(euclid(*a, *b)?.1))
                }
                "<" => pairwise(args, |a, b| a < b),
                "<=" => pairwise(args, |a, b| a <= b),
                ">" => pairwise(args, |a, b| a > b),
                ">=" => pairwise(args, |a, b| a >= b),
                "=" => {
                    let v: Vec<Value> = args.iter().map(|a| eval(a, env)).collect::<Result<_, _>>()?;
                    Ok(Value::Bool(v.windows(2).all(|w| w[0] == w[1])))
                }
                "distinct" => {
                    let v: Vec<Value> = args.iter().map(|a| eval(a, env)).collect::<Result<_, _>>()?;
                    let all = v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| a != b));
                    Ok(Value::Bool(all))
                }
                "not" => Ok(Value::Bool(!boolean(eval(single(args)?, env)?)?)),
                "and" => Ok(Value::Bool(bools(args)?.into_iter().all(|b| b))),
                "or" => Ok(Value::Bool(bools(args)?.into_iter().any(|b| b))),
                "xor" => Ok(Value::Bool(bools(args)?.into_iter().fold(false, |a, b| a ^ b))),
                "=>" => {
                    let v = bools(args)?;
                    let (last, init) = v.split_last().ok_or("`=>` needs arguments")?;
                    Ok(Value::Bool(init.iter().any(|b| !b) || *last))
                }
                "ite" => {
                    let [c, a, b] = args else {
                        return Err("ite takes three arguments".into());
                    };
                    if boolean(eval(c, env)?)? {
                        eval(a, env)
                    } else {
                        eval(b, env)
                    }
                }
                "abs" => Ok(Value::Int(int(eval(single(args)?, env)?)?.abs())),
                h => Err(format!("uninterpreted function `{h}`")),
            }
        }
        _ => Err(format!("unsupported term `{t}`")),
    }
}

fn single(args: &[Term]) -> Result<&Term, String> {
    match args {
        [a] => Ok(a),
        _ => Err("expected one argument".into()),
    }
}

pub fn eval_bool(t: &Term, env: &Env) -> Result<bool, String> {
    eval(t, env).and_then(boolean)
}

/// Collects 0-ary symbols, splitting them into boolean- and integer-used.
fn variables(t: &Term, boolean_pos: bool, ints: &mut BTreeSet<String>, bools: &mut BTreeSet<String>) {
    match t {
        Term::Symbol(s) | Term::QuotedSymbol(s) => {
            if boolean_pos {
                bools.insert(s.clone());
            } else {
                ints.insert(s.clone());
            }
        }
        Term::Annotated { body, .. } => variables(body, boolean_pos, ints, bools),
        Term::App(_, args) => {
            let head = t.as_app().map(|(h, _)| h).unwrap_or_default();
            let logical = matches!(head, "and" | "or" | "not" | "=>" | "xor");
            for (i, a) in args.iter().enumerate() {
                let pos = logical || (head == "ite" && i == 0) || (head == "ite" && boolean_pos);
                let pos = pos || (head == "=" && args.iter().any(is_boolean_shaped));
                variables(a, pos, ints, bools);
            }
        }
        _ => {}
    }
}

fn is_boolean_shaped(t: &Term) -> bool {
    match t {
        Term::BoolLit(_) => true,
        _ => t.as_app().is_some_and(|(h, _)| {
            matches!(
                h,
                "and" | "or" | "not" | "=>" | "xor" | "<" | "<=" | ">" | ">=" | "=" | "distinct"
            )
        }),
    }
}

/// Searches integer values in `[-bound, bound]` (and both booleans) for an
/// assignment that satisfies every hypothesis and falsifies the goal.
///
/// `Ok(None)` means no counterexample exists inside the box, which for the
/// small linear obligations used in tests is treated as validity.
pub fn bounded_counterexample(
    hypotheses: &[Term],
    goal: &Term,
    bound: i64,
) -> Result<Option<HashMap<String, Value>>, String> {
    let negated = Term::not(goal.clone());
    let all: Vec<&Term> = hypotheses.iter().chain(std::iter::once(&negated)).collect();
    let (mut ints, mut bools) = (BTreeSet::new(), BTreeSet::new());
    for t in &all {
        variables(t, true, &mut ints, &mut bools);
    }
    let ints: Vec<String> = ints.difference(&bools).cloned().collect();
    let bools: Vec<String> = bools.into_iter().collect();
    let width = (2 * bound + 1) as u128;
    let total = width
        .checked_pow(ints.len() as u32)
        .and_then(|n| n.checked_mul(1u128 << bools.len().min(64)))
        .filter(|n| *n <= 5_000_000)
        .ok_or("search space too large")?;
    let mut env = Env::new();
    for k in 0..total {
        let mut rest = k;
        for v in &ints {
            env.insert(v.clone(), Value::Int((rest % width) as i128 - bound as i128));
            rest /= width;
        }
        for v in &bools {
            env.insert(v.clone(), Value::Bool(rest % 2 == 1));
            rest /= 2;
        }
        let mut sat = true;
        for t in &all {
            match eval_bool(t, &env) {
                Ok(true) => {}
                Ok(false) => {
                    sat = false;
                    break;
                }
                // e.g. division by zero: this point says nothing
                Err(e) if e == "division by zero" => {
                    sat = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if sat {
            return Ok(Some(env));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn euclidean_division() {
        let env = Env::new();
        assert_eq!(eval(&t("(mod (- 7) 2)"), &env), Ok(Value::Int(1)));
        assert_eq!(eval(&t("(div (- 7) 2)"), &env), Ok(Value::Int(-4)));
        assert_eq!(eval(&t("(Mod 7 (- 2))"), &env), Ok(Value::Int(1)));
        assert_eq!(eval(&t("(Div 7 (- 2))"), &env), Ok(Value::Int(-3)));
    }

    #[test]
    fn counterexamples() {
        assert_eq!(
            bounded_counterexample(&[t("(> x 0)")], &t("(>= x 1)"), 5),
            Ok(None)
        );
        let cex = bounded_counterexample(&[], &t("(> x 0)"), 5).unwrap().unwrap();
        assert!(matches!(cex["x"], Value::Int(v) if v <= 0));
        assert_eq!(
            bounded_counterexample(&[], &t("(= (Mod (Mul x (+ x 1)) (LitInt 2)) (LitInt 0))"), 8),
            Ok(None)
        );
        let cex = bounded_counterexample(&[], &t("(or p (> y 2))"), 3).unwrap().unwrap();
        assert_eq!(cex["p"], Value::Bool(false));
        assert!(bounded_counterexample(&[], &t("(f x)"), 3).is_err());
    }
}
