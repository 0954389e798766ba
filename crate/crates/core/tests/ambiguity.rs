mod common;

use common::*;
use mrlens::ambiguity::*;
use mrlens::dsl::parse_regex;
use mrlens::mre::{Mre, RegexTypeEnv, RegexValueEnv};
use mrlens::oracle::enumerate_regex;
use proptest::prelude::*;

fn re(src: &str) -> Mre {
    parse_regex(src).unwrap()
}

fn empty() -> RegexTypeEnv {
    RegexTypeEnv::new()
}

#[test]
fn iteration_examples() {
    assert!(check_unamb_iter(&empty(), &re(r#""ab""#)).unwrap().is_unambiguous());
    assert!(!check_unamb_iter(&empty(), &re(r#""a"*"#)).unwrap().is_unambiguous());
    let env = empty().extend("x", re(r#""a"*"#));
    assert!(check_unamb_iter(&env, &re(r#"x . "b""#)).unwrap().is_unambiguous());
}

#[test]
fn concatenation_examples() {
    assert!(check_unamb_concat(&empty(), &re(r#""a""#), &re(r#""b""#)).unwrap().is_unambiguous());
    assert!(!check_unamb_concat(&empty(), &re(r#""a"*"#), &re(r#""a"*"#)).unwrap().is_unambiguous());
    let url = fixture("gutenberg.mrl").regex("pg_url").unwrap().clone();
    assert!(check_unamb_concat(&empty(), &Mre::lit("<a href=\""), &url).unwrap().is_unambiguous());
}

#[test]
fn alternation_examples() {
    assert!(check_unamb_alt(&empty(), &re(r#""ba""#), &re(r#""ca""#)).unwrap().is_unambiguous());
    assert!(!check_unamb_alt(&empty(), &re(r#""a""#), &re(r#""a""#)).unwrap().is_unambiguous());
    assert!(check_unamb_alt(&empty(), &Mre::Epsilon, &re(r#""a""#)).unwrap().is_unambiguous());
}

#[test]
fn binding_examples() {
    let a_star = re(r#""a"*"#);
    assert!(check_unamb_bind(&empty(), "x", &a_star, &re(r#"x . "b" . x"#)).unwrap().is_unambiguous());
    assert!(!check_unamb_bind(&empty(), "x", &a_star, &re(r#""a"* . x"#)).unwrap().is_unambiguous());
    assert!(!check_unamb_bind(&empty(), "x", &a_star, &re(r#""b""#)).unwrap().is_unambiguous());
}

#[test]
fn strong_unambiguity_examples() {
    assert!(strongly_unambiguous(&empty(), &re(r#""ba" | "ca""#)).unwrap().is_unambiguous());
    let verdict = strongly_unambiguous(&empty(), &re(r#""a" | "a""#)).unwrap();
    assert!(verdict.to_string().contains("\"a\""), "{verdict}");
    assert!(strongly_unambiguous(&empty(), &re(r#"bind x : "a"* in x . "c" . x"#)).unwrap().is_unambiguous());
    for name in ["pg_html_MR", "pg_md_MR", "pg_html", "pg_md"] {
        let r = fixture("gutenberg.mrl").regex(name).unwrap().clone();
        assert!(strongly_unambiguous(&empty(), &r).unwrap().is_unambiguous(), "{name}");
    }
}

#[test]
fn errors() {
    assert_eq!(check_unamb_iter(&empty(), &re("x")), Err(AmbError::UnboundVariable("x".into())));
    let bad = RegexTypeEnv::from_entries([("y", re("x")), ("x", re(r#""a""#))]);
    assert_eq!(strongly_unambiguous(&bad, &re("y")), Err(AmbError::EnvIllFormed));
}

/// Number of parse trees of `w`, capped at 2. An iteration whose body
/// matches the empty string counts as two parses.
fn parses(r: &Mre, env: &RegexValueEnv, w: &str) -> usize {
    let cuts: Vec<usize> = w.char_indices().map(|(i, _)| i).chain([w.len()]).collect();
    let n = match r {
        Mre::Epsilon => usize::from(w.is_empty()),
        Mre::Const(c) => usize::from(w.chars().eq([*c])),
        Mre::Var(x) => usize::from(env.lookup(x).is_some_and(|v| v == w)),
        Mre::Alt(l, rr) => parses(l, env, w) + parses(rr, env, w),
        Mre::Concat(l, rr) => cuts.iter().map(|&i| parses(l, env, &w[..i]) * parses(rr, env, &w[i..])).sum(),
        Mre::Star(body) => {
            let nullable = parses(body, env, "") > 0;
            let base: usize = if w.is_empty() {
                1
            } else {
                cuts[1..].iter().map(|&i| parses(body, env, &w[..i]) * parses(r, env, &w[i..])).sum()
            };
            if nullable && base > 0 {
                2
            } else {
                base
            }
        }
        Mre::Bind(x, d, b) => {
            let n = w.chars().count();
            let witnesses = enumerate_regex(d, env, n + 2).unwrap();
            let short: usize = witnesses
                .iter()
                .filter(|v| v.chars().count() <= n)
                .map(|v| parses(d, env, v) * parses(b, &env.extend(x.clone(), v.clone()), w))
                .sum();
            // Longer witnesses can only give parses that skip `x`.
            let long = witnesses.iter().filter(|v| v.chars().count() > n).count();
            let skipping = parses(b, &env.extend(x.clone(), "\0".repeat(n + 1)), w);
            short + long * skipping
        }
    };
    n.min(2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn unambiguous_verdicts_hold_up_to_five(r in closed_mre()) {
        if strongly_unambiguous(&empty(), &r).unwrap().is_unambiguous() {
            let env = RegexValueEnv::new();
            for w in enumerate_regex(&r, &env, 5).unwrap() {
                prop_assert_eq!(parses(&r, &env, &w), 1, "{:?} in {}", w, r);
            }
        }
    }
}

#[test]
fn parse_counter_sanity() {
    let env = RegexValueEnv::new();
    assert_eq!(parses(&re(r#""a" | "a""#), &env, "a"), 2);
    assert_eq!(parses(&re(r#""a"* . "a"*"#), &env, "a"), 2);
    assert_eq!(parses(&re(r#"bind x : "a"* in x . "c" . x"#), &env, "aca"), 1);
    assert_eq!(parses(&re(r#"bind x : "a"* in "a"* . x"#), &env, "aa"), 2);
    assert_eq!(parses(&re(r#"(bind x : "a"* in x . "c" . x)*"#), &env, "acac"), 1);
}
