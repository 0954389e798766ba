//! Scoped regular expressions: a partial regex that marks where variables
//! are in scope, paired with an ordered environment of variable definitions.

use std::collections::BTreeSet;
use std::fmt::Debug;

use serde::Serialize;
use thiserror::Error;

use crate::mre::Mre;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SreError {
    #[error("binder `{0}` occurs more than once; alpha-rename first")]
    DuplicateBinder(String),
    #[error("variable `{0}` has no definition")]
    UnknownVariable(String),
    #[error("definition of `{0}` refers to a variable that is not defined before it")]
    DefinitionOrder(String),
}

/// A regex with variables and scope markers but no variable types. `V` is
/// the variable representation: names, or definition indices once
/// [`vars_to_indices`] has run.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "args")]
pub enum PartialRegex<V = String> {
    Epsilon,
    Const(char),
    Var(V),
    Star(Box<PartialRegex<V>>),
    Alt(Box<PartialRegex<V>>, Box<PartialRegex<V>>),
    Concat(Box<PartialRegex<V>>, Box<PartialRegex<V>>),
    /// `⟨body⟩x`: the variable is in scope in `body`.
    Scope(Box<PartialRegex<V>>, V),
}

impl<V> PartialRegex<V> {
    pub fn star(p: Self) -> Self {
        PartialRegex::Star(Box::new(p))
    }

    pub fn alt(l: Self, r: Self) -> Self {
        PartialRegex::Alt(Box::new(l), Box::new(r))
    }

    pub fn concat(l: Self, r: Self) -> Self {
        PartialRegex::Concat(Box::new(l), Box::new(r))
    }

    pub fn scope(body: Self, x: V) -> Self {
        PartialRegex::Scope(Box::new(body), x)
    }

    /// Number of nodes; pre-order node ids of children are derived from it.
    pub fn size(&self) -> usize {
        match self {
            PartialRegex::Epsilon | PartialRegex::Const(_) | PartialRegex::Var(_) => 1,
            PartialRegex::Star(p) | PartialRegex::Scope(p, _) => 1 + p.size(),
            PartialRegex::Alt(l, r) | PartialRegex::Concat(l, r) => 1 + l.size() + r.size(),
        }
    }

    fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a V)) {
        match self {
            PartialRegex::Epsilon | PartialRegex::Const(_) => {}
            PartialRegex::Var(x) => f(x),
            PartialRegex::Star(p) => p.visit_vars(f),
            PartialRegex::Scope(p, x) => {
                f(x);
                p.visit_vars(f);
            }
            PartialRegex::Alt(l, r) | PartialRegex::Concat(l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
        }
    }

    fn try_map<W, E>(&self, f: &impl Fn(&V) -> Result<W, E>) -> Result<PartialRegex<W>, E> {
        Ok(match self {
            PartialRegex::Epsilon => PartialRegex::Epsilon,
            PartialRegex::Const(c) => PartialRegex::Const(*c),
            PartialRegex::Var(x) => PartialRegex::Var(f(x)?),
            PartialRegex::Star(p) => PartialRegex::star(p.try_map(f)?),
            PartialRegex::Alt(l, r) => PartialRegex::alt(l.try_map(f)?, r.try_map(f)?),
            PartialRegex::Concat(l, r) => PartialRegex::concat(l.try_map(f)?, r.try_map(f)?),
            PartialRegex::Scope(p, x) => PartialRegex::scope(p.try_map(f)?, f(x)?),
        })
    }
}

impl PartialRegex<String> {
    pub fn var(name: impl Into<String>) -> Self {
        PartialRegex::Var(name.into())
    }

    pub fn lit(s: &str) -> Self {
        let chars: Vec<char> = s.chars().collect();
        match chars.split_last() {
            None => PartialRegex::Epsilon,
            Some((&last, init)) => init.iter().rev().fold(PartialRegex::Const(last), |acc, &c| {
                PartialRegex::concat(PartialRegex::Const(c), acc)
            }),
        }
    }
}

/// Ordered definitions. Index 0 is the leftmost entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DefEnv<V = String> {
    entries: Vec<(V, PartialRegex<V>)>,
}

impl<V> Default for DefEnv<V> {
    fn default() -> Self {
        DefEnv { entries: Vec::new() }
    }
}

impl<V: Clone + PartialEq> DefEnv<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<(V, PartialRegex<V>)>) -> Self {
        DefEnv { entries }
    }

    pub fn push(&mut self, x: V, p: PartialRegex<V>) {
        self.entries.push((x, p));
    }

    pub fn index_of(&self, x: &V) -> Option<usize> {
        self.entries.iter().position(|(k, _)| k == x)
    }

    /// `d↓i`: the definitions strictly before index `i`.
    pub fn prefix(&self, i: usize) -> Self {
        DefEnv { entries: self.entries[..i].to_vec() }
    }

    /// `d↓x`: the definitions strictly before `x`.
    pub fn prefix_before(&self, x: &V) -> Option<Self> {
        self.index_of(x).map(|i| self.prefix(i))
    }

    pub fn entry_at(&self, i: usize) -> Option<(&V, &PartialRegex<V>)> {
        self.entries.get(i).map(|(k, p)| (k, p))
    }

    pub fn entries(&self) -> &[(V, PartialRegex<V>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A scoped regular expression `⟨main ∥ defs⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Sre<V = String> {
    pub main: PartialRegex<V>,
    pub defs: DefEnv<V>,
}

impl<V: Clone + PartialEq + Debug> Sre<V> {
    pub fn new(main: PartialRegex<V>, defs: DefEnv<V>) -> Self {
        Sre { main, defs }
    }

    /// Checks the structural invariants: definition names are unique, every
    /// variable in `main` is defined, and each definition only mentions
    /// variables defined strictly before it.
    pub fn validate(&self) -> Result<(), SreError>
    where
        V: ToString,
    {
        for (i, (x, p)) in self.defs.entries().iter().enumerate() {
            if self.defs.entries()[..i].iter().any(|(k, _)| k == x) {
                return Err(SreError::DuplicateBinder(x.to_string()));
            }
            let mut bad = None;
            p.visit_vars(&mut |v| {
                if bad.is_none() && !self.defs.entries()[..i].iter().any(|(k, _)| k == v) {
                    bad = Some(x.to_string());
                }
            });
            if let Some(x) = bad {
                return Err(SreError::DefinitionOrder(x));
            }
        }
        let mut missing = None;
        self.main.visit_vars(&mut |v| {
            if missing.is_none() && self.defs.index_of(v).is_none() {
                missing = Some(v.to_string());
            }
        });
        match missing {
            Some(v) => Err(SreError::UnknownVariable(v)),
            None => Ok(()),
        }
    }
}

/// Translates a uniquely-bound MRE into a scoped regex: every binding form
/// becomes a scope marker in place and its definition is appended to the
/// environment.
pub fn mre_to_sre(r: &Mre) -> Result<Sre, SreError> {
    let mut seen = BTreeSet::new();
    for x in r.binders() {
        if !seen.insert(x) {
            return Err(SreError::DuplicateBinder(x.to_string()));
        }
    }
    let mut defs = DefEnv::new();
    let main = to_sre_acc(r, &mut defs);
    Ok(Sre { main, defs })
}

/// The accumulator is threaded left to right, so the definitions produced
/// by a left operand precede those of the right operand, and a binder's
/// definition precedes everything inside its body.
fn to_sre_acc(r: &Mre, defs: &mut DefEnv) -> PartialRegex {
    match r {
        Mre::Epsilon => PartialRegex::Epsilon,
        Mre::Const(c) => PartialRegex::Const(*c),
        Mre::Var(x) => PartialRegex::Var(x.clone()),
        Mre::Star(inner) => PartialRegex::star(to_sre_acc(inner, defs)),
        Mre::Alt(l, r) => {
            let p1 = to_sre_acc(l, defs);
            let p2 = to_sre_acc(r, defs);
            PartialRegex::alt(p1, p2)
        }
        Mre::Concat(l, r) => {
            let p1 = to_sre_acc(l, defs);
            let p2 = to_sre_acc(r, defs);
            PartialRegex::concat(p1, p2)
        }
        Mre::Bind(x, def, body) => {
            let p1 = to_sre_acc(def, defs);
            defs.push(x.clone(), p1);
            let p2 = to_sre_acc(body, defs);
            PartialRegex::scope(p2, x.clone())
        }
    }
}

/// Replaces every variable name by its index in the definition environment.
pub fn vars_to_indices(e: &Sre) -> Result<Sre<usize>, SreError> {
    let lookup = |x: &String| e.defs.index_of(x).ok_or_else(|| SreError::UnknownVariable(x.clone()));
    let main = e.main.try_map(&lookup)?;
    let mut defs = DefEnv::new();
    for (i, (x, p)) in e.defs.entries().iter().enumerate() {
        let p = p.try_map(&lookup)?;
        let mut forward = false;
        p.visit_vars(&mut |&k| forward |= k >= i);
        if forward {
            return Err(SreError::DefinitionOrder(x.clone()));
        }
        defs.push(i, p);
    }
    Ok(Sre { main, defs })
}
