mod common;

use common::*;
use mrlens::cli::run;

fn mrl(args: &[&str], stdin: &str) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("mrl").chain(args.iter().copied());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(name: &str) -> String {
    fixture_path(name).to_string_lossy().into_owned()
}

#[test]
fn match_exit_codes() {
    let f = path("backref.mrl");
    assert_eq!(mrl(&["match", &f, "-i", "aca"], "").0, 0);
    assert_eq!(mrl(&["match", &f, "m", "-i", "ac"], "").0, 1);
    let (code, out, _) = mrl(&["match", &f, "--explain", "-i", "aca"], "");
    assert_eq!(code, 0);
    assert!(out.starts_with("ScopeIn SwitchInit"), "{out}");
    let href = path("gutenberg_href.mrl");
    assert_eq!(mrl(&["match", &href, "pg_html_line_MR", "--lines"], &fixture_text("bad_link.html")).0, 1);
    assert_eq!(mrl(&["match", &path("gutenberg.html"), "x"], "").0, 2);
}

#[test]
fn check_prints_types() {
    let (code, out, _) = mrl(&["check", &path("gutenberg.mrl")], "");
    assert_eq!(code, 0);
    assert!(out.starts_with("(bind fmap1 : \"GUTINDEX.\""), "{out}");
    assert!(out.contains("\n<=>\n(bind fmap2"), "{out}");
    let (code, _, err) = mrl(&["check", &path("lenses.mrl"), "ambiguous"], "");
    assert_ne!(code, 0);
    assert!(err.contains("OrT"), "{err}");
    assert_eq!(mrl(&["check", &path("lenses.mrl"), "missing"], "").0, 2);
}

#[test]
fn get_and_put() {
    let g = path("gutenberg.mrl");
    let (html, md) = (fixture_text("gutenberg.html"), fixture_text("gutenberg.md"));
    assert_eq!(mrl(&["get", &g, "--lines"], &html), (0, md.clone(), String::new()));
    assert_eq!(mrl(&["put", &g, "--lines"], &md), (0, html.clone(), String::new()));
    let first = html.lines().next().unwrap();
    assert_eq!(mrl(&["get", &g], first).1, md.lines().next().unwrap());
    let (code, _, err) = mrl(&["get", &g], &html);
    assert_eq!(code, 1);
    assert!(err.contains("stopped at byte"), "{err}");
}

#[test]
fn compile_emitters() {
    let f = path("backref.mrl");
    let (code, out, _) = mrl(&["compile", &f, "m", "--emit", "mrras"], "");
    assert_eq!(code, 0);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["automata"].as_array().unwrap().len(), 2);
    let (code, out, _) = mrl(&["compile", &f, "m", "--emit", "sre"], "");
    assert_eq!(code, 0);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["main"]["kind"], "Scope");
    assert!(mrl(&["compile", &f, "m", "--emit", "dot"], "").1.starts_with("digraph"));
    assert_eq!(mrl(&["compile", &f, "naive"], "").0, 2);
}

#[test]
fn oracle_listing() {
    let f = path("backref.mrl");
    assert_eq!(mrl(&["oracle", &f, "xbx", "--max-len", "5"], "").1, "b\naba\naabaa\n");
    let dir = std::env::temp_dir().join(format!("mrl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let e = dir.join("eps.mrl");
    std::fs::write(&e, "main e := eps;").unwrap();
    assert_eq!(mrl(&["oracle", e.to_str().unwrap(), "--max-len", "3"], "").1, "<eps>\n");
    let bad = dir.join("bad.mrl");
    std::fs::write(&bad, "main e := (eps;").unwrap();
    assert_eq!(mrl(&["match", bad.to_str().unwrap(), "-i", ""], "").0, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn oracle_and_match_agree() {
    let f = path("backref.mrl");
    for name in ["m", "xbx", "rewrite", "nested", "a_or_b_twice"] {
        let (_, listed, _) = mrl(&["oracle", &f, name, "--max-len", "5"], "");
        for w in listed.lines() {
            let w = if w == "<eps>" { "" } else { w };
            assert_eq!(mrl(&["match", &f, name, "-i", w], "").0, 0, "{name} {w:?}");
        }
    }
}

#[test]
fn output_is_deterministic() {
    let g = path("gutenberg.mrl");
    let first = mrl(&["check", &g], "");
    for _ in 0..3 {
        assert_eq!(mrl(&["check", &g], ""), first);
    }
    let f = path("backref.mrl");
    let dot = mrl(&["compile", &f, "nested", "--emit", "dot"], "");
    assert_eq!(mrl(&["compile", &f, "nested", "--emit", "dot"], ""), dot);
}
