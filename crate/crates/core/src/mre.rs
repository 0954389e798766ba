//! Match-reference regular expressions and the environments they are
//! checked and evaluated in.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Marker separating a base name from its freshness counter. Never valid in
/// a user-written identifier.
pub const FRESH_MARKER: char = '$';

/// A match-reference regular expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mre {
    /// The empty string.
    Epsilon,
    Const(char),
    Var(String),
    Star(Box<Mre>),
    Alt(Box<Mre>, Box<Mre>),
    Concat(Box<Mre>, Box<Mre>),
    /// `bind x : def in body`; `x` is in scope in `body` only.
    Bind(String, Box<Mre>, Box<Mre>),
}

impl Mre {
    pub fn var(name: impl Into<String>) -> Mre {
        Mre::Var(name.into())
    }

    pub fn star(inner: Mre) -> Mre {
        Mre::Star(Box::new(inner))
    }

    pub fn alt(left: Mre, right: Mre) -> Mre {
        Mre::Alt(Box::new(left), Box::new(right))
    }

    pub fn concat(left: Mre, right: Mre) -> Mre {
        Mre::Concat(Box::new(left), Box::new(right))
    }

    pub fn bind(name: impl Into<String>, def: Mre, body: Mre) -> Mre {
        Mre::Bind(name.into(), Box::new(def), Box::new(body))
    }

    /// A literal string as a right-nested chain of constants; the empty
    /// string is [`Mre::Epsilon`].
    pub fn lit(s: &str) -> Mre {
        let chars: Vec<char> = s.chars().collect();
        match chars.split_last() {
            None => Mre::Epsilon,
            Some((&last, init)) => init
                .iter()
                .rev()
                .fold(Mre::Const(last), |acc, &c| Mre::concat(Mre::Const(c), acc)),
        }
    }

    /// Left-nested concatenation of a sequence; empty sequence is epsilon.
    pub fn seq<I: IntoIterator<Item = Mre>>(items: I) -> Mre {
        let mut it = items.into_iter();
        match it.next() {
            None => Mre::Epsilon,
            Some(first) => it.fold(first, Mre::concat),
        }
    }

    /// Left-nested alternation of single characters, the desugaring of a
    /// character class.
    pub fn class<I: IntoIterator<Item = char>>(chars: I) -> Mre {
        let mut it = chars.into_iter();
        let first = it.next().expect("character class must not be empty");
        it.fold(Mre::Const(first), |acc, c| Mre::alt(acc, Mre::Const(c)))
    }

    /// If this expression is a literal string (epsilon, or a right-nested
    /// chain of constants) returns it.
    pub fn as_literal(&self) -> Option<String> {
        let mut out = String::new();
        let mut cur = self;
        loop {
            match cur {
                Mre::Epsilon => return Some(out),
                Mre::Const(c) => {
                    out.push(*c);
                    return Some(out);
                }
                Mre::Concat(l, r) => match **l {
                    Mre::Const(c) => {
                        out.push(c);
                        cur = r;
                    }
                    _ => return None,
                },
                _ => return None,
            }
        }
    }

    /// Characters appearing in constants.
    pub fn alphabet(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        self.collect_alphabet(&mut out);
        out
    }

    fn collect_alphabet(&self, out: &mut BTreeSet<char>) {
        match self {
            Mre::Epsilon | Mre::Var(_) => {}
            Mre::Const(c) => {
                out.insert(*c);
            }
            Mre::Star(r) => r.collect_alphabet(out),
            Mre::Alt(l, r) | Mre::Concat(l, r) | Mre::Bind(_, l, r) => {
                l.collect_alphabet(out);
                r.collect_alphabet(out);
            }
        }
    }

    /// Names introduced by `Bind` nodes, in pre-order.
    pub fn binders(&self) -> Vec<&str> {
        let mut out = Vec::new();
        fn go<'a>(r: &'a Mre, out: &mut Vec<&'a str>) {
            match r {
                Mre::Epsilon | Mre::Const(_) | Mre::Var(_) => {}
                Mre::Star(r) => go(r, out),
                Mre::Alt(l, r) | Mre::Concat(l, r) => {
                    go(l, out);
                    go(r, out);
                }
                Mre::Bind(x, d, b) => {
                    out.push(x);
                    go(d, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    pub fn has_unique_binders(&self) -> bool {
        let names = self.binders();
        let set: BTreeSet<&str> = names.iter().copied().collect();
        set.len() == names.len()
    }

    /// Replaces free occurrences of variables by the given expressions.
    /// Binders are not renamed, so replacements must not mention names bound
    /// inside `self`.
    pub fn substitute(&self, subst: &HashMap<String, Mre>) -> Mre {
        match self {
            Mre::Epsilon | Mre::Const(_) => self.clone(),
            Mre::Var(x) => subst.get(x).cloned().unwrap_or_else(|| self.clone()),
            Mre::Star(r) => Mre::star(r.substitute(subst)),
            Mre::Alt(l, r) => Mre::alt(l.substitute(subst), r.substitute(subst)),
            Mre::Concat(l, r) => Mre::concat(l.substitute(subst), r.substitute(subst)),
            Mre::Bind(x, d, b) => {
                let def = d.substitute(subst);
                let body = if subst.contains_key(x) {
                    let mut inner = subst.clone();
                    inner.remove(x);
                    b.substitute(&inner)
                } else {
                    b.substitute(subst)
                };
                Mre::bind(x.clone(), def, body)
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Mre::Epsilon | Mre::Const(_) | Mre::Var(_) => 1,
            Mre::Star(r) => 1 + r.size(),
            Mre::Alt(l, r) | Mre::Concat(l, r) | Mre::Bind(_, l, r) => 1 + l.size() + r.size(),
        }
    }
}

impl fmt::Display for Mre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print_regex(self))
    }
}

pub fn free_vars(r: &Mre) -> BTreeSet<String> {
    match r {
        Mre::Epsilon | Mre::Const(_) => BTreeSet::new(),
        Mre::Var(x) => BTreeSet::from([x.clone()]),
        Mre::Star(r) => free_vars(r),
        Mre::Alt(l, r) | Mre::Concat(l, r) => {
            let mut out = free_vars(l);
            out.extend(free_vars(r));
            out
        }
        Mre::Bind(x, d, b) => {
            let mut out = free_vars(b);
            out.remove(x);
            out.extend(free_vars(d));
            out
        }
    }
}

/// Every name occurring in `r`, bound or free.
fn all_names(r: &Mre, out: &mut BTreeSet<String>) {
    match r {
        Mre::Epsilon | Mre::Const(_) => {}
        Mre::Var(x) => {
            out.insert(x.clone());
        }
        Mre::Star(r) => all_names(r, out),
        Mre::Alt(l, r) | Mre::Concat(l, r) => {
            all_names(l, out);
            all_names(r, out);
        }
        Mre::Bind(x, d, b) => {
            out.insert(x.clone());
            all_names(d, out);
            all_names(b, out);
        }
    }
}

/// Renames generated `base$n` names to `base1`, `base2`, ... so the
/// expressions print as parseable text. One renaming is shared across all
/// of `rs`.
pub fn readable_names(rs: &[&Mre]) -> Vec<Mre> {
    let mut taken = BTreeSet::new();
    for r in rs {
        all_names(r, &mut taken);
    }
    let mut map: HashMap<String, String> = HashMap::new();
    let mut counters: HashMap<String, usize> = HashMap::new();
    let mut generated: Vec<String> = taken.iter().filter(|n| n.contains(FRESH_MARKER)).cloned().collect();
    generated.sort_by_key(|n| {
        let (base, k) = n.rsplit_once(FRESH_MARKER).unwrap_or((n, ""));
        (base.to_string(), k.parse::<usize>().unwrap_or(usize::MAX))
    });
    for name in generated {
        let base = base_name(&name).to_string();
        let k = counters.entry(base.clone()).or_insert(0);
        let new = loop {
            *k += 1;
            let cand = format!("{base}{k}");
            if !taken.contains(&cand) {
                break cand;
            }
        };
        taken.insert(new.clone());
        map.insert(name, new);
    }
    fn go(r: &Mre, map: &HashMap<String, String>) -> Mre {
        let name = |x: &String| map.get(x).cloned().unwrap_or_else(|| x.clone());
        match r {
            Mre::Epsilon | Mre::Const(_) => r.clone(),
            Mre::Var(x) => Mre::Var(name(x)),
            Mre::Star(r) => Mre::star(go(r, map)),
            Mre::Alt(l, r) => Mre::alt(go(l, map), go(r, map)),
            Mre::Concat(l, r) => Mre::concat(go(l, map), go(r, map)),
            Mre::Bind(x, d, b) => Mre::bind(name(x), go(d, map), go(b, map)),
        }
    }
    rs.iter().map(|r| go(r, &map)).collect()
}

pub fn is_closed(r: &Mre) -> bool {
    free_vars(r).is_empty()
}

/// Deterministic supply of fresh names of the form `base$n`.
#[derive(Debug, Default, Clone)]
pub struct FreshNames {
    next: usize,
}

impl FreshNames {
    pub fn new() -> Self {
        Self::default()
    }

    /// A supply whose names cannot collide with any of `names`.
    pub fn avoiding<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        let next = names
            .into_iter()
            .filter_map(|n| n.rsplit_once(FRESH_MARKER))
            .filter_map(|(_, k)| k.parse::<usize>().ok())
            .map(|k| k + 1)
            .max()
            .unwrap_or(0);
        FreshNames { next }
    }

    pub fn fresh(&mut self, name: &str) -> String {
        let base = base_name(name);
        let out = format!("{base}{FRESH_MARKER}{}", self.next);
        self.next += 1;
        out
    }
}

/// The user-facing part of a possibly freshened name.
pub fn base_name(name: &str) -> &str {
    match name.find(FRESH_MARKER) {
        Some(i) => &name[..i],
        None => name,
    }
}

/// Renames every binder to a globally fresh name; free variables are left
/// alone.
pub fn alpha_rename(r: &Mre) -> Mre {
    alpha_rename_with(r, &mut FreshNames::new())
}

pub fn alpha_rename_with(r: &Mre, fresh: &mut FreshNames) -> Mre {
    fn go(r: &Mre, scope: &mut Vec<(String, String)>, fresh: &mut FreshNames) -> Mre {
        match r {
            Mre::Epsilon | Mre::Const(_) => r.clone(),
            Mre::Var(x) => match scope.iter().rev().find(|(old, _)| old == x) {
                Some((_, new)) => Mre::Var(new.clone()),
                None => r.clone(),
            },
            Mre::Star(inner) => Mre::star(go(inner, scope, fresh)),
            Mre::Alt(l, r) => Mre::alt(go(l, scope, fresh), go(r, scope, fresh)),
            Mre::Concat(l, r) => Mre::concat(go(l, scope, fresh), go(r, scope, fresh)),
            Mre::Bind(x, d, b) => {
                let new = fresh.fresh(x);
                let def = go(d, scope, fresh);
                scope.push((x.clone(), new.clone()));
                let body = go(b, scope, fresh);
                scope.pop();
                Mre::bind(new, def, body)
            }
        }
    }
    go(r, &mut Vec::new(), fresh)
}

/// Structural equality up to consistent renaming of bound variables.
pub fn alpha_eq(a: &Mre, b: &Mre) -> bool {
    fn go(a: &Mre, b: &Mre, scope: &mut Vec<(String, String)>) -> bool {
        match (a, b) {
            (Mre::Epsilon, Mre::Epsilon) => true,
            (Mre::Const(x), Mre::Const(y)) => x == y,
            (Mre::Var(x), Mre::Var(y)) => {
                let lx = scope.iter().rposition(|(l, _)| l == x);
                let ry = scope.iter().rposition(|(_, r)| r == y);
                match (lx, ry) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Mre::Star(x), Mre::Star(y)) => go(x, y, scope),
            (Mre::Alt(l1, r1), Mre::Alt(l2, r2)) | (Mre::Concat(l1, r1), Mre::Concat(l2, r2)) => {
                go(l1, l2, scope) && go(r1, r2, scope)
            }
            (Mre::Bind(x, d1, b1), Mre::Bind(y, d2, b2)) => {
                if !go(d1, d2, scope) {
                    return false;
                }
                scope.push((x.clone(), y.clone()));
                let ok = go(b1, b2, scope);
                scope.pop();
                ok
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// Ordered, persistent environment. Extension returns a new environment;
/// lookup finds the rightmost binding.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Env<T> {
    entries: Vec<(String, T)>,
}

impl<T> Default for Env<T> {
    fn default() -> Self {
        Env { entries: Vec::new() }
    }
}

impl<T: Clone> Env<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
    {
        Env { entries: entries.into_iter().map(|(k, v)| (k.into(), v)).collect() }
    }

    pub fn extend(&self, name: impl Into<String>, value: T) -> Self {
        let mut entries = self.entries.clone();
        entries.push((name.into(), value));
        Env { entries }
    }

    pub fn lookup(&self, name: &str) -> Option<&T> {
        self.entries.iter().rev().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().rposition(|(k, _)| k == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }

    /// The entries strictly before position `i`.
    pub fn prefix(&self, i: usize) -> Self {
        Env { entries: self.entries[..i].to_vec() }
    }

    /// The environment in force where `name` was bound: everything to its
    /// left.
    pub fn prefix_before(&self, name: &str) -> Option<Self> {
        self.position(name).map(|i| self.prefix(i))
    }

    pub fn entries(&self) -> &[(String, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    fn has_unique_names(&self) -> bool {
        let set: BTreeSet<&str> = self.names().collect();
        set.len() == self.entries.len()
    }
}

/// Maps regex variables to strings.
pub type RegexValueEnv = Env<String>;
/// Maps regex variables to their type regexes.
pub type RegexTypeEnv = Env<Mre>;
/// Maps lens variables to a pair of regex variables (source, target).
pub type LensTypeEnv = Env<(String, String)>;
/// Maps lens variables to a pair of strings.
pub type LensValueEnv = Env<(String, String)>;

pub fn rtenv_good_for(env: &RegexTypeEnv, r: &Mre) -> bool {
    free_vars(r).iter().all(|x| env.contains(x))
}

pub fn rtenv_well_formed(env: &RegexTypeEnv) -> bool {
    env.entries().iter().enumerate().all(|(i, (x, r))| {
        let prefix = env.prefix(i);
        !prefix.contains(x) && rtenv_good_for(&prefix, r)
    })
}

/// Both type environments are well-formed together. Read off the inference
/// rules: the regex environment is built two entries at a time, one pair of
/// fresh regex variables per lens variable, in the same order.
pub fn envs_well_formed(lenv: &LensTypeEnv, renv: &RegexTypeEnv) -> bool {
    if renv.len() != 2 * lenv.len() || !lenv.has_unique_names() || !rtenv_well_formed(renv) {
        return false;
    }
    lenv.entries().iter().zip(renv.entries().chunks(2)).all(|((_, (x1, x2)), pair)| {
        pair[0].0 == *x1 && pair[1].0 == *x2
    })
}

/// Each value is in the language of its type, evaluated in the preceding
/// part of the value environment. Domains must agree position by position.
pub fn renv_consistent(tenv: &RegexTypeEnv, venv: &RegexValueEnv) -> bool {
    if tenv.len() != venv.len() {
        return false;
    }
    for (i, ((tx, ty), (vx, value))) in tenv.entries().iter().zip(venv.entries()).enumerate() {
        if tx != vx {
            return false;
        }
        let prefix = venv.prefix(i);
        if !crate::mrras::member_in_env(ty, &prefix, value).unwrap_or(false) {
            return false;
        }
    }
    true
}
