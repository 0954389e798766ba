mod common;

use std::collections::{HashSet, VecDeque};

use common::*;
use mrlens::mre::{alpha_rename, Mre, RegexValueEnv};
use mrlens::mrras::*;
use mrlens::oracle::{all_strings, enumerate_regex, regex_member};
use proptest::prelude::*;

fn akcak() -> Mre {
    Mre::bind("x", Mre::star(Mre::Const('a')), Mre::seq([Mre::var("x"), Mre::Const('c'), Mre::var("x")]))
}

#[test]
fn worked_example_has_two_automata() {
    let m = compile(&akcak()).unwrap();
    assert_eq!(m.automata.len(), 2);
    let json = m.to_json();
    assert_eq!(json["automata"].as_array().unwrap().len(), 2);
    assert_eq!(json["automata"][0]["index"], 0);
}

#[test]
fn walkthrough_on_aca() {
    let m = compile(&akcak()).unwrap();
    let trace = m.match_witness("aca").unwrap();
    let rules: Vec<Rule> = trace.steps.iter().filter(|s| !(s.rule == Rule::ConsumeChar && s.consumed.is_empty())).map(|s| s.rule).collect();
    assert_eq!(
        rules,
        [Rule::ScopeIn, Rule::SwitchInit, Rule::ConsumeChar, Rule::SwitchReturn, Rule::ConsumeChar, Rule::ConsumeVar, Rule::ScopeOut]
    );
}

#[test]
fn dot_for_single_constant() {
    let dot = compile(&Mre::Const('a')).unwrap().to_dot();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("circle").count(), 2);
    assert!(dot.contains("q0_0 -> q0_1 [label=\"a\"]"));
}

#[test]
fn free_variable_is_not_compiled() {
    assert!(matches!(compile(&Mre::var("x")), Err(MrrasError::NotClosed(_))));
}

#[test]
fn corpus_agrees_with_oracle_at_four() {
    for (name, r) in corpus() {
        let m = compile(&r).unwrap();
        for w in all_strings(&alphabet_with_fresh(&r), 4) {
            assert_eq!(m.accepts(&w), regex_member(&r, &RegexValueEnv::new(), &w).unwrap(), "{name} on {w:?}");
        }
    }
}

fn buffer_step_allowed(before: &Buffer, after: &Buffer) -> bool {
    use Buffer::*;
    match (before, after) {
        (a, b) if a == b => true,
        (Out, In) | (In, Curr(_)) | (Found(_), Out) | (In, Out) => true,
        (Curr(_), Found(_)) => true,
        (Curr(a), Curr(b)) => b.starts_with(a.as_str()),
        _ => false,
    }
}

/// Every configuration reachable on `w`.
fn reachable(m: &Mrras, w: &str) -> Vec<(Config, Config)> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([m.initial_config(w)]);
    let mut edges = Vec::new();
    while let Some(c) = queue.pop_front() {
        if !seen.insert(c.clone()) {
            continue;
        }
        for (_, next) in m.step(w, &c) {
            edges.push((c.clone(), next.clone()));
            queue.push_back(next);
        }
    }
    edges
}

fn check_tree(r: &Mre, t: &ParseTree, env: &mut Vec<(String, String)>) -> Result<(), String> {
    let venv = RegexValueEnv::from_entries(env.iter().cloned());
    match (r, t) {
        (Mre::Epsilon, ParseTree::Epsilon) | (Mre::Const(_), ParseTree::Const(_)) => Ok(()),
        (Mre::Var(x), ParseTree::Var { text, .. }) => {
            let bound = env.iter().rev().find(|(n, _)| n == x).map(|(_, v)| v);
            if bound == Some(text) { Ok(()) } else { Err(format!("{x} matched {text:?}, bound to {bound:?}")) }
        }
        (Mre::Star(i), ParseTree::Star { iterations }) => iterations.iter().try_for_each(|t| check_tree(i, t, env)),
        (Mre::Alt(l, rr), ParseTree::Alt { branch, tree }) => match branch {
            Branch::Left => check_tree(l, tree, env),
            Branch::Right => check_tree(rr, tree, env),
        },
        (Mre::Concat(l, rr), ParseTree::Concat { left, right, .. }) => {
            check_tree(l, left, env)?;
            check_tree(rr, right, env)
        }
        (Mre::Bind(x, d, b), ParseTree::Bind { witness, def, body, .. }) => {
            if let (Some(w), Some(dt)) = (witness, def) {
                if !regex_member(d, &venv, w).map_err(|e| e.to_string())? {
                    return Err(format!("witness {w:?} of {x} is not in its type"));
                }
                check_tree(d, dt, env)?;
            }
            env.push((x.clone(), witness.clone().unwrap_or_default()));
            let out = check_tree(b, body, env);
            env.pop();
            out
        }
        (r, t) => Err(format!("tree {t:?} does not fit {r}")),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn automaton_agrees_with_oracle(r in closed_mre()) {
        let lang = enumerate_regex(&r, &RegexValueEnv::new(), 4).unwrap();
        let m = compile(&r).unwrap();
        for w in all_strings(&alphabet_with_fresh(&r), 4) {
            prop_assert_eq!(m.accepts(&w), lang.contains(&w), "on {:?}", w);
        }
    }

    #[test]
    fn reachable_configurations_are_disciplined(r in closed_mre(), w in "[abc]{0,4}") {
        let m = compile(&r).unwrap();
        for (before, after) in reachable(&m, &w) {
            prop_assert!(after.stack.len() <= m.automata.len());
            for (b, a) in before.buffers.iter().zip(&after.buffers).take(m.automata.len() - 1) {
                prop_assert!(buffer_step_allowed(b, a), "{:?} -> {:?}", b, a);
            }
        }
    }

    #[test]
    fn traces_replay_to_acceptance(r in closed_mre(), w in "[abc]{0,5}") {
        let m = compile(&r).unwrap();
        for order in [ExploreOrder::Canonical, ExploreOrder::Reverse, ExploreOrder::Shuffled(3)] {
            if let Some(trace) = m.search(&w, order) {
                let end = m.replay(&w, &trace).expect("trace replays");
                prop_assert!(m.is_accepting(&w, &end));
            }
        }
    }

    #[test]
    fn parse_trees_respect_witnesses(r in closed_mre(), w in "[abc]{0,5}") {
        match parse(&r, &w) {
            Ok(tree) => {
                prop_assert_eq!(tree.text(), w.clone());
                let renamed = alpha_rename(&r);
                prop_assert_eq!(check_tree(&r, &tree, &mut Vec::new()).or_else(|_| check_tree(&renamed, &tree, &mut Vec::new())), Ok(()));
            }
            Err(ParseError::NoMatch) => prop_assert!(!compile(&r).unwrap().accepts(&w)),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}
