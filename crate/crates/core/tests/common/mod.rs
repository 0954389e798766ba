#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use mrlens::dsl::{parse_file, parse_regex, SourceFile, Value};
use mrlens::lens::Lens;
use mrlens::mre::{free_vars, Mre};
use proptest::prelude::*;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture(name: &str) -> SourceFile {
    parse_file(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub const LENS_FIXTURES: [&str; 3] = ["gutenberg.mrl", "gutenberg_href.mrl", "lenses.mrl"];

/// Every lens defined in the fixture files, with a label.
pub fn fixture_lenses() -> Vec<(String, Lens)> {
    let mut out = Vec::new();
    for file in LENS_FIXTURES {
        for def in fixture(file).defs {
            if let Value::Lens(l) = def.value {
                out.push((format!("{file}:{}", def.name), l));
            }
        }
    }
    out
}

/// Closed expressions with small alphabets.
pub const CORPUS: &[(&str, &str)] = &[
    ("akcak", r#"bind x : "a"* in x . "c" . x"#),
    ("akbak", r#"bind x : "a"* in x . "b" . x"#),
    ("rewrite", r#"(bind x : "a"* in x . "b" . x)* . (bind x : "a"* in x . "b" . x . "c" . x)"#),
    ("two_binds", r#"(bind x1 : "a"* in x1 . "b" . x1)* . (bind x2 : "a"* in x2 . "b" . x2 . "c" . x2)"#),
    ("star_bind", r#"(bind x : "a"* in x . "b" . x)*"#),
    ("square", r#"bind x : "a" | "b" in x . x"#),
    ("nested", r#"bind x : "a" | "b" in bind y : x . "c"* in y . "d" . y"#),
    ("bind_over_star", r#"bind x : "a"* in (x . "b")*"#),
    ("star_square", r#"(bind x : "ab" | "b" in x . x)*"#),
    ("ww", r#"bind x : ("a" | "b")* in x . "c" . x"#),
    ("two_vars", r#"bind x : "a" in bind y : "b"* in x . y . x . y"#),
    ("ba_ca", r#""ba" | "ca""#),
    ("plain", r#"("a" | "b")* . "c""#),
    ("eps", "eps"),
    ("eps_var", "bind x : eps in x . x"),
    ("even", r#"bind x : "a"* in x . x"#),
    ("typed_by_var", r#"bind x : "a"* in bind y : x . "b" in y . y"#),
    ("alt_use", r#"bind x : "a" . "b"* in x . (x | "c")"#),
    ("delimited_star", r#"(bind x : "a"* in x . "b" . x . "c")*"#),
    ("star_then_var", r#"bind x : "a" | "b" in (x . "c")* . x"#),
    ("inner_star", r#"bind x : "a"* in (bind y : "b"* in y . x . y)*"#),
    ("prefix", r#""a"* . (bind x : "b" | "c" in x . "a" . x)"#),
    ("bind_in_def", r#"bind x : (bind y : "a" | "b" in y . y)* in x . "c" . x"#),
    ("class", "[a-c] . (bind x : [a-b] in x)"),
];

pub fn corpus() -> Vec<(&'static str, Mre)> {
    CORPUS
        .iter()
        .map(|(name, src)| {
            let r = parse_regex(src).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(free_vars(&r).is_empty(), "{name} is not closed");
            (*name, r)
        })
        .collect()
}

/// The expression's symbols plus one symbol it does not use.
pub fn alphabet_with_fresh(r: &Mre) -> Vec<char> {
    let mut sigma: BTreeSet<char> = r.alphabet();
    let fresh = ('a'..='z').chain('0'..='9').find(|c| !sigma.contains(c)).expect("alphabet exhausted");
    sigma.insert(fresh);
    sigma.into_iter().collect()
}

/// Replaces free variables by a constant.
pub fn close(r: Mre) -> Mre {
    fn go(r: &Mre, bound: &mut Vec<String>) -> Mre {
        match r {
            Mre::Epsilon | Mre::Const(_) => r.clone(),
            Mre::Var(x) if bound.contains(x) => r.clone(),
            Mre::Var(_) => Mre::Const('c'),
            Mre::Star(i) => Mre::star(go(i, bound)),
            Mre::Alt(l, rr) => Mre::alt(go(l, bound), go(rr, bound)),
            Mre::Concat(l, rr) => Mre::concat(go(l, bound), go(rr, bound)),
            Mre::Bind(x, d, b) => {
                let d = go(d, bound);
                bound.push(x.clone());
                let b = go(b, bound);
                bound.pop();
                Mre::bind(x.clone(), d, b)
            }
        }
    }
    go(&r, &mut Vec::new())
}

fn mre_over(chars: &'static [char], names: &'static [&'static str], depth: u32) -> impl Strategy<Value = Mre> {
    let leaf = prop_oneof![
        Just(Mre::Epsilon),
        proptest::sample::select(chars).prop_map(Mre::Const),
        proptest::sample::select(names).prop_map(Mre::var),
    ];
    leaf.prop_recursive(depth, 24, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(Mre::star),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Mre::alt(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Mre::concat(l, r)),
            (proptest::sample::select(names), inner.clone(), inner).prop_map(|(x, d, b)| Mre::bind(x, d, b)),
        ]
    })
}

/// Small closed expressions over {a, b, c}.
pub fn closed_mre() -> impl Strategy<Value = Mre> {
    mre_over(&['a', 'b', 'c'], &["x", "y"], 4).prop_map(close)
}

/// Any expression, with awkward characters and free variables.
pub fn any_mre() -> impl Strategy<Value = Mre> {
    mre_over(&['a', 'b', '"', '\\', '\n', '\t', 'é', ' ', '\u{1}', ']', '*'], &["x", "y", "fname", "v_1", "Q"], 5)
}

fn text() -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::sample::select(vec!['a', 'B', '"', '\\', '\n', '<', '-', '>', 'ü']), 0..4)
        .prop_map(|cs| cs.into_iter().collect())
}

/// Any lens, not necessarily well-typed.
pub fn any_lens() -> impl Strategy<Value = Lens> {
    let leaf = prop_oneof![
        (text(), text()).prop_map(|(a, b)| Lens::constant(a, b)),
        any_mre().prop_map(Lens::id),
        proptest::sample::select(&["l", "fmap", "y"][..]).prop_map(Lens::var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Lens::iter),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Lens::concat(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Lens::swap(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Lens::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Lens::comp(a, b)),
            (proptest::sample::select(&["l", "fmap", "y"][..]), inner.clone(), inner)
                .prop_map(|(y, d, b)| Lens::link(y, d, b)),
        ]
    })
}

/// Small lenses over closed pieces, often well-typed.
pub fn small_lens() -> impl Strategy<Value = Lens> {
    let piece = prop_oneof![
        proptest::sample::select(&["a", "b", "ab", ""][..])
            .prop_flat_map(|s| proptest::sample::select(&["A", "B", "BA", "c"][..]).prop_map(move |t| Lens::constant(s, t))),
        closed_mre().prop_map(Lens::id),
    ];
    let leaf = prop_oneof![
        piece,
        proptest::sample::select(&["a", "b"][..]).prop_map(|s| {
            Lens::link("y", Lens::id(Mre::star(Mre::lit(s))), Lens::seq([Lens::var("y"), Lens::constant("-", "="), Lens::var("y")]))
        }),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Lens::iter),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Lens::concat(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Lens::swap(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Lens::or(a, b)),
        ]
    })
}
