//! Match-reference regex automata systems: one finite automaton per variable
//! definition plus a main automaton, run together over a shared input with
//! a state stack and one buffer per automaton.

mod parse;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::mre::{alpha_rename, free_vars, Mre, RegexValueEnv};
use crate::sre::{mre_to_sre, vars_to_indices, PartialRegex, Sre, SreError};

pub use parse::{parse, parse_with_order, Branch, ParseError, ParseTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MrrasError {
    #[error("automaton {automaton} refers to variable {index}, which is not below it")]
    IndexOutOfRange { automaton: usize, index: usize },
    #[error(transparent)]
    Sre(#[from] SreError),
    #[error("expression has free variables: {0}")]
    NotClosed(String),
}

/// A state, tagged with the automaton it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId {
    pub automaton: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AutSymbol {
    Char(char),
    Eps,
    Open(usize),
    Close(usize),
    Ref(usize),
}

/// Which part of the construction created a transition. `node` is the
/// pre-order position of the creating node inside the automaton's partial
/// regex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Origin {
    pub node: usize,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Const,
    EpsLeaf,
    Ref,
    StarEnter,
    StarLoop,
    AltLeft,
    AltRight,
    ConcatJoin,
    ScopeOpen,
    ScopeClose,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub sym: AutSymbol,
    pub to: usize,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub index: usize,
    pub num_states: usize,
    pub initial: usize,
    pub finals: BTreeSet<usize>,
    pub transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
}

impl Automaton {
    pub fn is_final(&self, q: usize) -> bool {
        self.finals.contains(&q)
    }

    /// Transition ids leaving `q`, in construction order.
    pub fn outgoing(&self, q: usize) -> &[usize] {
        &self.outgoing[q]
    }

    fn state(&self, index: usize) -> StateId {
        StateId { automaton: self.index, index }
    }
}

struct Builder {
    index: usize,
    num_states: usize,
    transitions: Vec<Transition>,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        self.num_states += 1;
        self.num_states - 1
    }

    fn edge(&mut self, from: usize, sym: AutSymbol, to: usize, node: usize, role: Role) {
        self.transitions.push(Transition { from, sym, to, origin: Origin { node, role } });
    }

    fn check(&self, h: usize) -> Result<(), MrrasError> {
        if h >= self.index {
            return Err(MrrasError::IndexOutOfRange { automaton: self.index, index: h });
        }
        Ok(())
    }

    /// Returns the initial state and final states of the fragment for `p`.
    fn build(&mut self, p: &PartialRegex<usize>, node: usize) -> Result<(usize, Vec<usize>), MrrasError> {
        match p {
            PartialRegex::Epsilon => {
                let (a, b) = (self.fresh(), self.fresh());
                self.edge(a, AutSymbol::Eps, b, node, Role::EpsLeaf);
                Ok((a, vec![b]))
            }
            PartialRegex::Const(c) => {
                let (a, b) = (self.fresh(), self.fresh());
                self.edge(a, AutSymbol::Char(*c), b, node, Role::Const);
                Ok((a, vec![b]))
            }
            PartialRegex::Var(h) => {
                self.check(*h)?;
                let (a, b) = (self.fresh(), self.fresh());
                self.edge(a, AutSymbol::Ref(*h), b, node, Role::Ref);
                Ok((a, vec![b]))
            }
            PartialRegex::Star(inner) => {
                let s = self.fresh();
                let (i, fs) = self.build(inner, node + 1)?;
                self.edge(s, AutSymbol::Eps, i, node, Role::StarEnter);
                for &f in &fs {
                    self.edge(f, AutSymbol::Eps, s, node, Role::StarLoop);
                }
                let mut finals = fs;
                finals.push(s);
                Ok((s, finals))
            }
            PartialRegex::Alt(l, r) => {
                let s = self.fresh();
                let (il, mut fl) = self.build(l, node + 1)?;
                let (ir, fr) = self.build(r, node + 1 + l.size())?;
                self.edge(s, AutSymbol::Eps, il, node, Role::AltLeft);
                self.edge(s, AutSymbol::Eps, ir, node, Role::AltRight);
                fl.extend(fr);
                Ok((s, fl))
            }
            PartialRegex::Concat(l, r) => {
                let (il, fl) = self.build(l, node + 1)?;
                let (ir, fr) = self.build(r, node + 1 + l.size())?;
                for f in fl {
                    self.edge(f, AutSymbol::Eps, ir, node, Role::ConcatJoin);
                }
                Ok((il, fr))
            }
            PartialRegex::Scope(body, h) => {
                self.check(*h)?;
                let s = self.fresh();
                let (i, fs) = self.build(body, node + 1)?;
                let t = self.fresh();
                self.edge(s, AutSymbol::Open(*h), i, node, Role::ScopeOpen);
                for f in fs {
                    self.edge(f, AutSymbol::Close(*h), t, node, Role::ScopeClose);
                }
                Ok((s, vec![t]))
            }
        }
    }
}

/// Builds automaton `i` from an indexed partial regex.
pub fn rpart_to_fsa(p: &PartialRegex<usize>, i: usize) -> Result<Automaton, MrrasError> {
    let mut b = Builder { index: i, num_states: 0, transitions: Vec::new() };
    let (initial, finals) = b.build(p, 0)?;
    let mut outgoing = vec![Vec::new(); b.num_states];
    for (id, t) in b.transitions.iter().enumerate() {
        outgoing[t.from].push(id);
    }
    Ok(Automaton {
        index: i,
        num_states: b.num_states,
        initial,
        finals: finals.into_iter().collect(),
        transitions: b.transitions,
        outgoing,
    })
}

/// A compiled system. The last automaton is the main one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mrras {
    pub automata: Vec<Automaton>,
    /// Variable names in definition order, for diagnostics.
    pub names: Vec<String>,
    /// The indexed partial regexes each automaton was built from.
    pub parts: Vec<PartialRegex<usize>>,
}

pub fn sre_to_mrras(e: &Sre) -> Result<Mrras, MrrasError> {
    let indexed = vars_to_indices(e)?;
    let mut automata = Vec::with_capacity(e.defs.len() + 1);
    let mut parts = Vec::with_capacity(e.defs.len() + 1);
    for (k, (_, p)) in indexed.defs.entries().iter().enumerate() {
        automata.push(rpart_to_fsa(p, k)?);
        parts.push(p.clone());
    }
    automata.push(rpart_to_fsa(&indexed.main, e.defs.len())?);
    parts.push(indexed.main);
    let names = e.defs.entries().iter().map(|(x, _)| x.clone()).collect();
    Ok(Mrras { automata, names, parts })
}

/// Alpha-renames, translates, and compiles a closed MRE.
pub fn compile(r: &Mre) -> Result<Mrras, MrrasError> {
    let fv = free_vars(r);
    if !fv.is_empty() {
        return Err(MrrasError::NotClosed(fv.into_iter().collect::<Vec<_>>().join(", ")));
    }
    sre_to_mrras(&mre_to_sre(&alpha_rename(r))?)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Buffer {
    Out,
    In,
    Curr(String),
    Found(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config {
    pub state: StateId,
    /// Byte offset into the input; the remaining input is `w[pos..]`.
    pub pos: usize,
    pub stack: Vec<StateId>,
    pub buffers: Vec<Buffer>,
}

impl Config {
    pub fn remaining<'a>(&self, w: &'a str) -> &'a str {
        &w[self.pos..]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    ConsumeChar,
    ConsumeVar,
    ScopeIn,
    ScopeOut,
    SwitchInit,
    SwitchReturn,
}

impl Rule {
    fn class(self) -> u8 {
        match self {
            Rule::ConsumeChar | Rule::ConsumeVar => 0,
            Rule::ScopeIn | Rule::ScopeOut => 1,
            Rule::SwitchInit | Rule::SwitchReturn => 2,
        }
    }
}

/// Names a transition of a system: automaton and transition id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransitionRef {
    pub automaton: usize,
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub rule: Rule,
    /// Absent for `SwitchReturn`, which leaves a final state without an edge.
    pub transition: Option<TransitionRef>,
    pub from_pos: usize,
    pub to_pos: usize,
    /// Text consumed from the input by this step.
    pub consumed: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub steps: Vec<StepRecord>,
}

impl Trace {
    pub fn rules(&self) -> Vec<Rule> {
        self.steps.iter().map(|s| s.rule).collect()
    }
}

/// Order in which successor configurations are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExploreOrder {
    /// Consuming steps, then scope changes, then switches; ties by
    /// transition id.
    Canonical,
    Reverse,
    Shuffled(u64),
}

fn append(buf: &mut Buffer, s: &str) {
    match buf {
        Buffer::Curr(w) => w.push_str(s),
        other => panic!("active automaton buffer is {other:?}, expected Curr"),
    }
}

impl Mrras {
    pub fn main_index(&self) -> usize {
        self.automata.len() - 1
    }

    pub fn main(&self) -> &Automaton {
        &self.automata[self.main_index()]
    }

    pub fn transition(&self, t: TransitionRef) -> &Transition {
        &self.automata[t.automaton].transitions[t.id]
    }

    pub fn initial_config(&self, _w: &str) -> Config {
        let mut buffers = vec![Buffer::Out; self.automata.len()];
        buffers[self.main_index()] = Buffer::Curr(String::new());
        Config { state: self.main().state(self.main().initial), pos: 0, stack: Vec::new(), buffers }
    }

    pub fn is_accepting(&self, w: &str, c: &Config) -> bool {
        let main = self.main_index();
        c.state.automaton == main
            && self.main().is_final(c.state.index)
            && c.pos == w.len()
            && c.stack.is_empty()
            && c.buffers[..main].iter().all(|b| *b == Buffer::Out)
            && c.buffers[main] == Buffer::Curr(w.to_string())
    }

    /// Every configuration reachable in one step, in canonical order.
    pub fn step(&self, w: &str, c: &Config) -> Vec<(StepRecord, Config)> {
        let a = c.state.automaton;
        let aut = &self.automata[a];
        let rest = c.remaining(w);
        let mut out = Vec::new();
        for &id in aut.outgoing(c.state.index) {
            let t = &aut.transitions[id];
            let tref = Some(TransitionRef { automaton: a, id });
            let mut next = c.clone();
            next.state = aut.state(t.to);
            let (rule, consumed) = match t.sym {
                AutSymbol::Char(ch) => {
                    if !rest.starts_with(ch) {
                        continue;
                    }
                    (Rule::ConsumeChar, ch.to_string())
                }
                AutSymbol::Eps => (Rule::ConsumeChar, String::new()),
                AutSymbol::Ref(j) => match &c.buffers[j] {
                    Buffer::Found(v) if rest.starts_with(v.as_str()) => (Rule::ConsumeVar, v.clone()),
                    Buffer::In => {
                        next.stack.push(next.state);
                        next.state = self.automata[j].state(self.automata[j].initial);
                        next.buffers[j] = Buffer::Curr(String::new());
                        (Rule::SwitchInit, String::new())
                    }
                    _ => continue,
                },
                AutSymbol::Open(j) => {
                    if c.buffers[j] != Buffer::Out {
                        continue;
                    }
                    next.buffers[j] = Buffer::In;
                    (Rule::ScopeIn, String::new())
                }
                AutSymbol::Close(j) => {
                    if !matches!(c.buffers[j], Buffer::In | Buffer::Found(_)) {
                        continue;
                    }
                    next.buffers[j] = Buffer::Out;
                    (Rule::ScopeOut, String::new())
                }
            };
            if matches!(rule, Rule::ConsumeChar | Rule::ConsumeVar) {
                next.pos += consumed.len();
                append(&mut next.buffers[a], &consumed);
            }
            let record = StepRecord { rule, transition: tref, from_pos: c.pos, to_pos: next.pos, consumed };
            out.push((record, next));
        }
        if a != self.main_index() && aut.is_final(c.state.index) {
            if let Some(&ret) = c.stack.last() {
                let mut next = c.clone();
                next.stack.pop();
                let found = match std::mem::replace(&mut next.buffers[a], Buffer::Out) {
                    Buffer::Curr(v) => v,
                    other => panic!("returning automaton buffer is {other:?}, expected Curr"),
                };
                append(&mut next.buffers[ret.automaton], &found);
                next.buffers[a] = Buffer::Found(found);
                next.state = ret;
                let record = StepRecord {
                    rule: Rule::SwitchReturn,
                    transition: None,
                    from_pos: c.pos,
                    to_pos: c.pos,
                    consumed: String::new(),
                };
                out.push((record, next));
            }
        }
        out.sort_by_key(|(r, _)| (r.rule.class(), r.transition.map_or(usize::MAX, |t| t.id)));
        out
    }

    pub fn accepts(&self, w: &str) -> bool {
        self.search(w, ExploreOrder::Canonical).is_some()
    }

    pub fn match_witness(&self, w: &str) -> Option<Trace> {
        self.search(w, ExploreOrder::Canonical)
    }

    /// Depth-first search for an accepting configuration. The visited set
    /// holds whole configurations, which cuts epsilon cycles.
    pub fn search(&self, w: &str, order: ExploreOrder) -> Option<Trace> {
        let mut rng = match order {
            ExploreOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        let mut arena: Vec<(Config, Option<(usize, StepRecord)>)> = vec![(self.initial_config(w), None)];
        let mut visited: HashSet<Config> = HashSet::new();
        let mut todo = vec![0usize];
        while let Some(node) = todo.pop() {
            let config = arena[node].0.clone();
            if !visited.insert(config.clone()) {
                continue;
            }
            if self.is_accepting(w, &config) {
                return Some(rebuild(&arena, node));
            }
            let mut succ = self.step(w, &config);
            match order {
                ExploreOrder::Canonical => {}
                ExploreOrder::Reverse => succ.reverse(),
                ExploreOrder::Shuffled(_) => succ.shuffle(rng.as_mut().expect("seeded above")),
            }
            // Pushed in reverse so the first successor is explored first.
            for (record, next) in succ.into_iter().rev() {
                if visited.contains(&next) {
                    continue;
                }
                arena.push((next, Some((node, record))));
                todo.push(arena.len() - 1);
            }
        }
        None
    }

    /// Replays a trace from the initial configuration, checking that each
    /// step is one the engine would take. Returns the final configuration.
    pub fn replay(&self, w: &str, trace: &Trace) -> Option<Config> {
        let mut c = self.initial_config(w);
        for rec in &trace.steps {
            let (_, next) = self.step(w, &c).into_iter().find(|(r, _)| r == rec)?;
            c = next;
        }
        Some(c)
    }

    pub fn to_json(&self) -> Value {
        let automata: Vec<Value> = self
            .automata
            .iter()
            .map(|a| {
                let transitions: Vec<Value> = a
                    .transitions
                    .iter()
                    .map(|t| json!({"from": t.from, "sym": sym_json(t.sym), "to": t.to}))
                    .collect();
                json!({
                    "index": a.index,
                    "name": self.names.get(a.index).map_or("main", String::as_str),
                    "states": (0..a.num_states).collect::<Vec<_>>(),
                    "initial": a.initial,
                    "finals": a.finals,
                    "transitions": transitions,
                })
            })
            .collect();
        json!({ "automata": automata })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph mrras {\n  rankdir=LR;\n");
        for a in &self.automata {
            let label = self.names.get(a.index).map_or("main", String::as_str);
            let _ = writeln!(out, "  subgraph cluster_{} {{\n    label=\"A{} ({})\";", a.index, a.index, label);
            for q in 0..a.num_states {
                let shape = if a.is_final(q) { "doublecircle" } else { "circle" };
                let _ = writeln!(out, "    q{}_{} [shape={shape}, label=\"q{}{}\"];", a.index, q, a.index, q);
            }
            let _ = writeln!(out, "    start{} [shape=point];", a.index);
            let _ = writeln!(out, "    start{} -> q{}_{};", a.index, a.index, a.initial);
            for t in &a.transitions {
                let _ = writeln!(
                    out,
                    "    q{}_{} -> q{}_{} [label=\"{}\"];",
                    a.index,
                    t.from,
                    a.index,
                    t.to,
                    sym_label(t.sym)
                );
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n");
        out
    }
}

fn rebuild(arena: &[(Config, Option<(usize, StepRecord)>)], mut node: usize) -> Trace {
    let mut steps = Vec::new();
    while let Some((parent, rec)) = &arena[node].1 {
        steps.push(rec.clone());
        node = *parent;
    }
    steps.reverse();
    Trace { steps }
}

fn sym_json(sym: AutSymbol) -> Value {
    match sym {
        AutSymbol::Char(c) => json!({"kind": "char", "char": c.to_string()}),
        AutSymbol::Eps => json!({"kind": "eps"}),
        AutSymbol::Open(k) => json!({"kind": "open", "index": k}),
        AutSymbol::Close(k) => json!({"kind": "close", "index": k}),
        AutSymbol::Ref(k) => json!({"kind": "ref", "index": k}),
    }
}

fn sym_label(sym: AutSymbol) -> String {
    match sym {
        AutSymbol::Char(c) => {
            let s = c.escape_default().to_string();
            s.replace('\\', "\\\\").replace('"', "\\\"")
        }
        AutSymbol::Eps => "ε".into(),
        AutSymbol::Open(k) => format!("in{k}"),
        AutSymbol::Close(k) => format!("out{k}"),
        AutSymbol::Ref(k) => format!("x{k}"),
    }
}

/// Replaces each free variable bound in `venv` by its literal value. Later
/// entries shadow earlier ones; a value may itself only be literal text.
pub fn close_with_values(r: &Mre, venv: &RegexValueEnv) -> Mre {
    let mut subst = HashMap::new();
    for (x, v) in venv.entries() {
        subst.insert(x.clone(), Mre::lit(v));
    }
    r.substitute(&subst)
}

/// Membership of `s` in the language of `r` under a value environment.
pub fn member_in_env(r: &Mre, venv: &RegexValueEnv, s: &str) -> Result<bool, MrrasError> {
    Ok(compile(&close_with_values(r, venv))?.accepts(s))
}
