//! Generators and helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use ipm::backtranslate::NameMap;
use ipm::sexpr::{needs_quoting, parse_script, Attr, AttrValue, Ident, LetBinding, QuantifierKind, SortedVar, Term};
use ipm::solver::{FakeMode, FakeSolver, Session, SolverConfig};
use ipm::vc::Obligation;

pub mod engine;

pub const TRIANGLE: &str = include_str!("../../fixtures/triangle_sum_even.smt2");
pub const TRIANGLE_STOCK: &str = include_str!("../../fixtures/triangle_sum_even.stock.smt2");

/// The tactic script that proves the triangle lemma.
pub const TRIANGLE_SCRIPT: [&str; 5] = [
    "case (x % 2) == 0",
    "assert x == 2 * (x / 2)",
    "assert x * (x + 1) == 2 * ((x / 2) * (x + 1))",
    "assert x == (2 * (x / 2)) + 1",
    "assert x * (x + 1) == 2 * (x * ((x / 2) + 1))",
];

/// The proof printed for that script.
pub const TRIANGLE_PROOF: &str = "\
if (((x % 2) == 0)) {
  assert (x == (2 * (x / 2)));
  assert ((x * (x + 1)) == (2 * ((x / 2) * (x + 1))));
} else {
  assert (x == ((2 * (x / 2)) + 1));
  assert ((x * (x + 1)) == (2 * (x * ((x / 2) + 1))));
}
";

pub const CHECK_QUERY: &str = "(x * (x + 1) % 2 == 0) <==> (x % 2 == 0 || (x + 1) % 2 == 0)";

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn squash(s: &str) -> String {
    s.split_whitespace().collect()
}

/// Deterministic samples from a strategy.
pub fn sample<S: Strategy>(strategy: S, n: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).expect("strategy yields values").current())
        .collect()
}

fn simple_name() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z][a-z0-9_]{0,5}",
        "[A-Z][A-Za-z0-9]{0,4}(@@[0-9])?",
        "\\$[A-Za-z]{1,6}",
        "[a-z]{1,3}#[0-9]{1,2}@@[0-9]",
        "[A-Z][a-z]{0,4}#[A-Z][a-z]{0,3}",
    ]
    .prop_filter("reserved or numeric", |s| !needs_quoting(s))
}

fn quoted_name() -> impl Strategy<Value = String> {
    "[a-z ()#@.0-9]{1,8}"
}

fn ident() -> impl Strategy<Value = Ident> {
    prop_oneof![
        simple_name().prop_map(|name| Ident { name, quoted: false }),
        quoted_name().prop_map(|name| Ident { name, quoted: true }),
    ]
}

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        simple_name().prop_map(Term::Symbol),
        quoted_name().prop_map(Term::QuotedSymbol),
        (-1000i64..1000).prop_map(|n| Term::IntLit(BigInt::from(n))),
        any::<bool>().prop_map(Term::BoolLit),
        "[a-z \"!]{0,6}".prop_map(Term::StringLit),
        prop_oneof!["[0-9]{1,3}\\.[0-9]{1,3}", "#x[0-9A-F]{1,4}", "#b[01]{1,6}"].prop_map(Term::SpecConst),
    ]
}

fn sort() -> impl Strategy<Value = Term> {
    prop_oneof![
        Just(Term::sym("Int")),
        Just(Term::sym("Bool")),
        Just(Term::sym("T@U")),
        Just(Term::app("Array", vec![Term::sym("Int"), Term::sym("Bool")])),
    ]
}

fn attr(inner: BoxedStrategy<Term>) -> impl Strategy<Value = Attr> {
    let key = prop_oneof![Just(":pattern"), Just(":qid"), Just(":skolemid"), Just(":weight")];
    let value = prop_oneof![
        Just(AttrValue::None),
        simple_name().prop_map(|s| AttrValue::Term(Term::Symbol(s))),
        prop::collection::vec(inner, 1..3).prop_map(AttrValue::List),
    ];
    (key, value).prop_map(|(key, value)| Attr {
        key: key.to_string(),
        value,
    })
}

/// SMT-LIB terms of depth at most `depth`, in every syntactic form the
/// parser produces.
pub fn term(depth: u32) -> BoxedStrategy<Term> {
    leaf()
        .prop_recursive(depth, 64, 4, |inner| {
            let head = prop_oneof![
                Just("+"), Just("*"), Just("and"), Just("or"), Just("=>"), Just("="), Just("ite"),
                Just("Mul"), Just("Mod"), Just("$Unbox"), Just("Seq#Build"), Just("f"),
            ];
            let app = (head, prop::collection::vec(inner.clone(), 1..4))
                .prop_map(|(h, args)| Term::app(h, args));
            // A curried head such as `(_ bv 8)` is an application too.
            let indexed = (prop::collection::vec(inner.clone(), 1..3), prop::collection::vec(inner.clone(), 1..3))
                .prop_map(|(idx, args)| {
                    let mut parts = vec![Term::sym("bv")];
                    parts.extend(idx);
                    Term::App(Box::new(Term::app("_", parts)), args)
                });
            // quantifier bodies are never bare annotations: those print
            // the same as quantifier attributes
            let body = inner.clone().prop_filter("annotation", |t| !matches!(t, Term::Annotated { .. }));
            let quant = (
                prop_oneof![Just(QuantifierKind::Forall), Just(QuantifierKind::Exists)],
                prop::collection::vec((ident(), sort()).prop_map(|(name, sort)| SortedVar { name, sort }), 1..3),
                body,
                prop::collection::vec(attr(inner.clone()), 0..2),
            )
                .prop_map(|(kind, bindings, body, attributes)| Term::Quantifier {
                    kind,
                    bindings,
                    body: Box::new(body),
                    attributes,
                });
            let let_ = (
                prop::collection::vec((ident(), inner.clone()).prop_map(|(name, value)| LetBinding { name, value }), 1..3),
                inner.clone(),
            )
                .prop_map(|(bindings, body)| Term::Let {
                    bindings,
                    body: Box::new(body),
                });
            let annotated = (inner.clone(), prop::collection::vec(attr(inner), 1..3))
                .prop_map(|(body, attributes)| Term::Annotated {
                    body: Box::new(body),
                    attributes,
                });
            prop_oneof![4 => app, 1 => indexed, 1 => quant, 1 => let_, 1 => annotated]
        })
        .boxed()
}

/// Nesting depth, counting leaves as depth 1.
pub fn depth(t: &Term) -> usize {
    let attrs = |a: &[Attr]| {
        a.iter()
            .map(|a| match &a.value {
                AttrValue::None => 0,
                AttrValue::Term(t) => depth(t),
                AttrValue::List(ts) => ts.iter().map(depth).max().unwrap_or(0),
            })
            .max()
            .unwrap_or(0)
    };
    match t {
        Term::App(h, args) => 1 + args.iter().map(depth).chain([depth(h)]).max().unwrap_or(0),
        Term::Quantifier { bindings, body, attributes, .. } => {
            1 + depth(body).max(attrs(attributes)).max(bindings.iter().map(|b| depth(&b.sort)).max().unwrap_or(0))
        }
        Term::Let { bindings, body } => 1 + depth(body).max(bindings.iter().map(|b| depth(&b.value)).max().unwrap_or(0)),
        Term::Annotated { body, attributes } => 1 + depth(body).max(attrs(attributes)),
        _ => 1,
    }
}

pub const VARS: [&str; 3] = ["x", "y", "z"];

/// Linear integer atoms over x, y and z.
pub fn linear_atom() -> impl Strategy<Value = Term> {
    let term = (prop::collection::vec((-3i64..=3, 0usize..3), 1..3), -4i64..=4).prop_map(|(parts, c)| {
        let mut sum: Vec<Term> = parts
            .into_iter()
            .filter(|(k, _)| *k != 0)
            .map(|(k, v)| Term::app("*", vec![Term::int(k), Term::sym(VARS[v])]))
            .collect();
        sum.push(Term::int(c));
        Term::app("+", sum)
    });
    let op = prop_oneof![Just("<="), Just("<"), Just(">="), Just("="), Just(">")];
    (op, term, -4i64..=4, any::<bool>()).prop_map(|(op, lhs, rhs, negate)| {
        let atom = Term::app(op, vec![lhs, Term::int(rhs)]);
        if negate {
            Term::not(atom)
        } else {
            atom
        }
    })
}

pub fn linear_obligation() -> impl Strategy<Value = (Vec<Term>, Term)> {
    (prop::collection::vec(linear_atom(), 0..3), linear_atom())
}

pub fn obligation(hypotheses: Vec<Term>, goal: Term) -> Obligation {
    Obligation {
        block: 0,
        raw_hypotheses: hypotheses.clone(),
        hypotheses,
        raw_goal: goal.clone(),
        goal,
        local_decls: Vec::new(),
        is_ipm_target: true,
    }
}

pub fn xyz_names() -> NameMap {
    let mut names = NameMap::new();
    for v in VARS {
        names.insert(v, v, true).unwrap();
    }
    names
}

pub fn xyz_prelude() -> Vec<ipm::sexpr::Command> {
    parse_script("(declare-fun x () Int) (declare-fun y () Int) (declare-fun z () Int)").unwrap()
}

pub fn fake_session(mode: FakeMode) -> Session {
    let (factory, _) = FakeSolver::factory(mode);
    Session::start(factory, &SolverConfig::default(), &[], &xyz_prelude()).unwrap()
}

/// The obligation `hyps ⊢ goal` as one implication.
pub fn as_formula(hypotheses: &[Term], goal: &Term) -> Term {
    if hypotheses.is_empty() {
        return goal.clone();
    }
    let mut conj = hypotheses.to_vec();
    if conj.len() > 1 {
        conj = vec![Term::app("and", conj)];
    }
    Term::app("=>", vec![conj.remove(0), goal.clone()])
}
