mod common;

use common::*;
use mrlens::dsl::parse_regex;
use mrlens::lens::Lens;
use mrlens::mre::{LensValueEnv, Mre, RegexValueEnv};
use mrlens::oracle::*;
use proptest::prelude::*;

fn lang(src: &str, n: usize) -> Vec<String> {
    sorted_shortlex(&enumerate_regex(&parse_regex(src).unwrap(), &RegexValueEnv::new(), n).unwrap())
}

#[test]
fn bind_example_denotation() {
    assert_eq!(lang(r#"bind x : "a"* in x . "b" . x"#, 5), ["b", "aba", "aabaa"]);
    assert_eq!(lang("eps", 3), [""]);
    assert_eq!(lang(r#""ba" | "ca""#, 3), ["ba", "ca"]);
}

#[test]
fn variables_read_the_environment() {
    let env = RegexValueEnv::from_entries([("x", "ab".to_string())]);
    let got = enumerate_regex(&Mre::star(Mre::var("x")), &env, 5).unwrap();
    assert_eq!(sorted_shortlex(&got), ["", "ab", "abab"]);
    assert_eq!(
        enumerate_regex(&Mre::var("x"), &RegexValueEnv::new(), 3),
        Err(OracleError::UnboundVariable("x".into()))
    );
}

#[test]
fn shortlex_puts_shorter_first() {
    let set: Language = ["b", "aa", "a", ""].iter().map(|s| s.to_string()).collect();
    assert_eq!(sorted_shortlex(&set), ["", "a", "b", "aa"]);
}

#[test]
fn budget_is_enforced() {
    let r = Mre::star(Mre::class(['a', 'b', 'c']));
    let small = Enumerator::with_budget(6, 50);
    assert!(matches!(small.regex(&r, &RegexValueEnv::new()), Err(OracleError::BudgetExceeded(50))));
}

#[test]
fn link_lens_relation() {
    let l = Lens::link(
        "y",
        Lens::iter(Lens::constant("a", "A")),
        Lens::seq([Lens::var("y"), Lens::id(Mre::Const('b')), Lens::var("y")]),
    );
    let rel = enumerate_lens(&l, &LensValueEnv::new(), 5).unwrap();
    let expected: Relation = [("b", "b"), ("aba", "AbA"), ("aabaa", "AAbAA")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(rel, expected);
}

#[test]
fn identity_lens_is_the_diagonal_on_the_corpus() {
    for (name, r) in corpus() {
        let lang = enumerate_regex(&r, &RegexValueEnv::new(), 5).unwrap();
        let rel = enumerate_lens(&Lens::id(r), &LensValueEnv::new(), 5).unwrap();
        let diag: Relation = lang.into_iter().map(|s| (s.clone(), s)).collect();
        assert_eq!(rel, diag, "{name}");
    }
}

proptest! {
    #[test]
    fn enumeration_is_monotone(r in closed_mre(), n in 0usize..5) {
        let env = RegexValueEnv::new();
        let small = enumerate_regex(&r, &env, n).unwrap();
        let big = enumerate_regex(&r, &env, n + 1).unwrap();
        prop_assert!(small.is_subset(&big));
        prop_assert!(small.iter().all(|s| s.chars().count() <= n));
    }

    #[test]
    fn membership_matches_enumeration(r in closed_mre(), w in "[abc]{0,4}") {
        let env = RegexValueEnv::new();
        prop_assert_eq!(regex_member(&r, &env, &w).unwrap(), enumerate_regex(&r, &env, 4).unwrap().contains(&w));
    }

    #[test]
    fn const_lens_transposes(a in "[ab]{0,3}", b in "[AB]{0,3}") {
        let env = LensValueEnv::new();
        let fwd = enumerate_lens(&Lens::constant(a.clone(), b.clone()), &env, 3).unwrap();
        let back = enumerate_lens(&Lens::constant(b, a), &env, 3).unwrap();
        let transposed: Relation = back.into_iter().map(|(x, y)| (y, x)).collect();
        prop_assert_eq!(fwd, transposed);
    }
}
