//! Bounded brute-force enumeration of regex, scoped-regex, and lens
//! denotations. Everything here follows the set-builder definitions
//! directly and is meant as ground truth for testing, not for speed.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::lens::Lens;
use crate::mre::{LensValueEnv, Mre, RegexValueEnv};
use crate::sre::{PartialRegex, Sre};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unbound lens variable `{0}`")]
    UnboundLensVariable(String),
    #[error("scope form names `{0}`, which has no definition")]
    UndefinedScopeVariable(String),
    #[error("enumeration exceeded its budget of {0} strings")]
    BudgetExceeded(usize),
}

pub type Language = BTreeSet<String>;
pub type Relation = BTreeSet<(String, String)>;

/// Shortlex order: shorter strings first, then lexicographic.
pub fn shortlex(a: &str, b: &str) -> Ordering {
    a.chars().count().cmp(&b.chars().count()).then_with(|| a.cmp(b))
}

pub fn sorted_shortlex(lang: &Language) -> Vec<String> {
    let mut out: Vec<String> = lang.iter().cloned().collect();
    out.sort_by(|a, b| shortlex(a, b));
    out
}

fn len(s: &str) -> usize {
    s.chars().count()
}

/// Length-bounded enumerator with an optional cap on intermediate set sizes.
#[derive(Debug, Clone, Copy)]
pub struct Enumerator {
    pub max_len: usize,
    pub budget: Option<usize>,
}

impl Enumerator {
    pub fn new(max_len: usize) -> Self {
        Enumerator { max_len, budget: None }
    }

    pub fn with_budget(max_len: usize, budget: usize) -> Self {
        Enumerator { max_len, budget: Some(budget) }
    }

    fn check<T>(&self, set: &BTreeSet<T>) -> Result<(), OracleError> {
        match self.budget {
            Some(b) if set.len() > b => Err(OracleError::BudgetExceeded(b)),
            _ => Ok(()),
        }
    }

    /// Stands for every witness longer than the bound. Such a witness never
    /// shows up in an enumerated string, but the strings that skip the
    /// variable still belong to the language: definitions are never empty.
    fn beyond(&self) -> String {
        "\0".repeat(self.max_len + 1)
    }

    pub fn regex(&self, r: &Mre, env: &RegexValueEnv) -> Result<Language, OracleError> {
        let n = self.max_len;
        let out = match r {
            Mre::Epsilon => Language::from([String::new()]),
            Mre::Const(c) => {
                if n >= 1 {
                    Language::from([c.to_string()])
                } else {
                    Language::new()
                }
            }
            Mre::Var(x) => {
                let s = env.lookup(x).ok_or_else(|| OracleError::UnboundVariable(x.clone()))?;
                if len(s) <= n {
                    Language::from([s.clone()])
                } else {
                    Language::new()
                }
            }
            Mre::Star(inner) => {
                let inner = self.regex(inner, env)?;
                self.star(&inner)?
            }
            Mre::Alt(l, r) => {
                let mut out = self.regex(l, env)?;
                out.extend(self.regex(r, env)?);
                out
            }
            Mre::Concat(l, r) => {
                let left = self.regex(l, env)?;
                let right = self.regex(r, env)?;
                self.concat(&left, &right)?
            }
            Mre::Bind(x, def, body) => {
                let mut out = Language::new();
                for witness in self.regex(def, env)?.into_iter().chain([self.beyond()]) {
                    let extended = env.extend(x.clone(), witness);
                    out.extend(self.regex(body, &extended)?);
                    self.check(&out)?;
                }
                out
            }
        };
        self.check(&out)?;
        Ok(out)
    }

    fn concat(&self, left: &Language, right: &Language) -> Result<Language, OracleError> {
        let mut out = Language::new();
        for u in left {
            let lu = len(u);
            for v in right {
                if lu + len(v) <= self.max_len {
                    out.insert(format!("{u}{v}"));
                }
            }
            self.check(&out)?;
        }
        Ok(out)
    }

    /// Iterates the inner language until no new strings within the bound
    /// appear.
    fn star(&self, inner: &Language) -> Result<Language, OracleError> {
        let mut out = Language::from([String::new()]);
        let mut frontier = out.clone();
        while !frontier.is_empty() {
            let mut next = Language::new();
            for u in &frontier {
                for v in inner {
                    if v.is_empty() || len(u) + len(v) > self.max_len {
                        continue;
                    }
                    let s = format!("{u}{v}");
                    if !out.contains(&s) {
                        next.insert(s);
                    }
                }
            }
            out.extend(next.iter().cloned());
            self.check(&out)?;
            frontier = next;
        }
        Ok(out)
    }

    pub fn sre(&self, e: &Sre, env: &RegexValueEnv) -> Result<Language, OracleError> {
        self.partial(&e.main, &e.defs, env)
    }

    fn partial(
        &self,
        p: &PartialRegex,
        defs: &crate::sre::DefEnv,
        env: &RegexValueEnv,
    ) -> Result<Language, OracleError> {
        let n = self.max_len;
        let out = match p {
            PartialRegex::Epsilon => Language::from([String::new()]),
            PartialRegex::Const(c) => {
                if n >= 1 {
                    Language::from([c.to_string()])
                } else {
                    Language::new()
                }
            }
            PartialRegex::Var(x) => {
                let s = env.lookup(x).ok_or_else(|| OracleError::UnboundVariable(x.clone()))?;
                if len(s) <= n {
                    Language::from([s.clone()])
                } else {
                    Language::new()
                }
            }
            PartialRegex::Star(inner) => {
                let inner = self.partial(inner, defs, env)?;
                self.star(&inner)?
            }
            PartialRegex::Alt(l, r) => {
                let mut out = self.partial(l, defs, env)?;
                out.extend(self.partial(r, defs, env)?);
                out
            }
            PartialRegex::Concat(l, r) => {
                let left = self.partial(l, defs, env)?;
                let right = self.partial(r, defs, env)?;
                self.concat(&left, &right)?
            }
            PartialRegex::Scope(body, x) => {
                let i = defs
                    .index_of(x)
                    .ok_or_else(|| OracleError::UndefinedScopeVariable(x.clone()))?;
                let (_, def) = defs.entry_at(i).expect("index_of returned a valid index");
                let restricted = defs.prefix(i);
                let mut out = Language::new();
                for witness in self.partial(def, &restricted, env)?.into_iter().chain([self.beyond()]) {
                    let extended = env.extend(x.clone(), witness);
                    out.extend(self.partial(body, defs, &extended)?);
                    self.check(&out)?;
                }
                out
            }
        };
        self.check(&out)?;
        Ok(out)
    }

    pub fn lens(&self, l: &Lens, env: &LensValueEnv) -> Result<Relation, OracleError> {
        let n = self.max_len;
        let fits = |a: &str, b: &str| len(a) <= n && len(b) <= n;
        let out = match l {
            Lens::Const(s1, s2) => {
                if fits(s1, s2) {
                    Relation::from([(s1.clone(), s2.clone())])
                } else {
                    Relation::new()
                }
            }
            Lens::Id(r) => self
                .regex(r, &RegexValueEnv::new())?
                .into_iter()
                .map(|s| (s.clone(), s))
                .collect(),
            Lens::Iter(inner) => {
                let inner = self.lens(inner, env)?;
                let mut out = Relation::from([(String::new(), String::new())]);
                let mut frontier = out.clone();
                while !frontier.is_empty() {
                    let mut next = Relation::new();
                    for (u1, u2) in &frontier {
                        for (v1, v2) in &inner {
                            if v1.is_empty() && v2.is_empty() {
                                continue;
                            }
                            let pair = (format!("{u1}{v1}"), format!("{u2}{v2}"));
                            if fits(&pair.0, &pair.1) && !out.contains(&pair) {
                                next.insert(pair);
                            }
                        }
                    }
                    out.extend(next.iter().cloned());
                    self.check(&out)?;
                    frontier = next;
                }
                out
            }
            Lens::Concat(a, b) | Lens::Swap(a, b) => {
                let swap = matches!(l, Lens::Swap(..));
                let left = self.lens(a, env)?;
                let right = self.lens(b, env)?;
                let mut out = Relation::new();
                for (s11, s21) in &left {
                    for (s12, s22) in &right {
                        let src = format!("{s11}{s12}");
                        let tgt = if swap { format!("{s22}{s21}") } else { format!("{s21}{s22}") };
                        if fits(&src, &tgt) {
                            out.insert((src, tgt));
                        }
                    }
                    self.check(&out)?;
                }
                out
            }
            Lens::Or(a, b) => {
                let mut out = self.lens(a, env)?;
                out.extend(self.lens(b, env)?);
                out
            }
            Lens::Comp(a, b) => {
                // Intermediate strings are bounded by the same length.
                let left = self.lens(a, env)?;
                let right = self.lens(b, env)?;
                let mut out = Relation::new();
                for (s1, s2) in &left {
                    for (t2, t3) in &right {
                        if s2 == t2 {
                            out.insert((s1.clone(), t3.clone()));
                        }
                    }
                }
                out
            }
            Lens::Var(y) => {
                let (s1, s2) =
                    env.lookup(y).ok_or_else(|| OracleError::UnboundLensVariable(y.clone()))?;
                if fits(s1, s2) {
                    Relation::from([(s1.clone(), s2.clone())])
                } else {
                    Relation::new()
                }
            }
            Lens::Link(y, def, body) => {
                let mut out = Relation::new();
                for pair in self.lens(def, env)?.into_iter().chain([(self.beyond(), self.beyond())]) {
                    let extended = env.extend(y.clone(), pair);
                    out.extend(self.lens(body, &extended)?);
                    self.check(&out)?;
                }
                out
            }
        };
        self.check(&out)?;
        Ok(out)
    }
}

pub fn enumerate_regex(r: &Mre, env: &RegexValueEnv, max_len: usize) -> Result<Language, OracleError> {
    Enumerator::new(max_len).regex(r, env)
}

pub fn regex_member(r: &Mre, env: &RegexValueEnv, s: &str) -> Result<bool, OracleError> {
    Ok(enumerate_regex(r, env, len(s))?.contains(s))
}

pub fn enumerate_sre(e: &Sre, env: &RegexValueEnv, max_len: usize) -> Result<Language, OracleError> {
    Enumerator::new(max_len).sre(e, env)
}

pub fn enumerate_lens(l: &Lens, env: &LensValueEnv, max_len: usize) -> Result<Relation, OracleError> {
    Enumerator::new(max_len).lens(l, env)
}

/// Every string over `alphabet` of length at most `max_len`, in shortlex
/// order.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for s in &layer {
            for &c in alphabet {
                let mut t = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
