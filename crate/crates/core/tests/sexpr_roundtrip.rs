mod support;

use proptest::prelude::*;

use ipm::sexpr::{parse_script, parse_term, print_term};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_then_parse_is_identity(t in support::term(7)) {
        let text = print_term(&t);
        prop_assert_eq!(parse_term(&text).map_err(|e| e.to_string()), Ok(t));
    }

    #[test]
    fn asserted_terms_survive_a_script(ts in prop::collection::vec(support::term(4), 1..5)) {
        let script: String = ts.iter().map(|t| format!("(assert {})\n", print_term(t))).collect();
        let cmds = parse_script(&script).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(cmds.len(), ts.len());
    }
}

#[test]
fn generated_terms_respect_the_depth_bound() {
    let terms = support::sample(support::term(7), 300);
    assert!(terms.iter().all(|t| support::depth(t) <= 8));
    assert!(terms.iter().any(|t| support::depth(t) >= 5), "generator should reach deep terms");
}
