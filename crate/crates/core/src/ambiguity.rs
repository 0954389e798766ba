//! Conservative checks for the unambiguity side conditions of lens types.
//!
//! Each check first replaces variables by their types, which can only grow
//! the language, and runs a classical automata check on the result. A
//! positive answer is then cross-checked by bounded enumeration over every
//! consistent value environment.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::mre::{alpha_rename_with, free_vars, rtenv_well_formed, FreshNames, Mre, RegexTypeEnv, RegexValueEnv};
use crate::oracle::{Enumerator, Language, OracleError};
use crate::regular::{concat_overlap, intersection_witness, nullable};

pub const DEFAULT_BOUND: usize = 8;
const DEFAULT_BUDGET: usize = 4000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AmbVerdict {
    Unambiguous,
    PossiblyAmbiguous(String),
}

impl AmbVerdict {
    pub fn is_unambiguous(&self) -> bool {
        matches!(self, AmbVerdict::Unambiguous)
    }

    fn and_then(self, f: impl FnOnce() -> Result<AmbVerdict, AmbError>) -> Result<AmbVerdict, AmbError> {
        match self {
            AmbVerdict::Unambiguous => f(),
            other => Ok(other),
        }
    }
}

impl fmt::Display for AmbVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbVerdict::Unambiguous => f.write_str("unambiguous"),
            AmbVerdict::PossiblyAmbiguous(why) => write!(f, "possibly ambiguous: {why}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmbError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("regex type environment is not well-formed")]
    EnvIllFormed,
}

/// Settings for the bounded cross-check.
#[derive(Debug, Clone, Copy)]
pub struct Checker {
    /// Longest string the cross-check enumerates.
    pub bound: usize,
    /// Largest intermediate set the cross-check builds before it retries
    /// with a smaller bound.
    pub budget: usize,
}

impl Default for Checker {
    fn default() -> Self {
        Checker { bound: DEFAULT_BOUND, budget: DEFAULT_BUDGET }
    }
}

fn quote(s: &str) -> String {
    format!("{s:?}")
}

/// Replaces every variable by its type, recursively, and every binder by
/// its body with the bound variable replaced by the definition. The result
/// has no variables and its language contains the original language under
/// every consistent value environment.
pub fn approximate(tenv: &RegexTypeEnv, r: &Mre) -> Result<Mre, AmbError> {
    fn go(tenv: &RegexTypeEnv, r: &Mre, local: &mut HashMap<String, Mre>) -> Result<Mre, AmbError> {
        Ok(match r {
            Mre::Epsilon | Mre::Const(_) => r.clone(),
            Mre::Var(x) => match local.get(x) {
                Some(a) => a.clone(),
                None => {
                    let i = tenv.position(x).ok_or_else(|| AmbError::UnboundVariable(x.clone()))?;
                    let ty = &tenv.entries()[i].1;
                    go(&tenv.prefix(i), ty, &mut HashMap::new())?
                }
            },
            Mre::Star(inner) => Mre::star(go(tenv, inner, local)?),
            Mre::Alt(l, r) => Mre::alt(go(tenv, l, local)?, go(tenv, r, local)?),
            Mre::Concat(l, r) => Mre::concat(go(tenv, l, local)?, go(tenv, r, local)?),
            Mre::Bind(x, d, b) => {
                let def = go(tenv, d, local)?;
                let saved = local.insert(x.clone(), def);
                let body = go(tenv, b, local);
                match saved {
                    Some(s) => local.insert(x.clone(), s),
                    None => local.remove(x),
                };
                body?
            }
        })
    }
    go(tenv, r, &mut HashMap::new())
}

/// Whether every string of `r` passes through an occurrence of `x`.
pub fn must_use(x: &str, r: &Mre) -> bool {
    match r {
        Mre::Var(y) => x == y,
        Mre::Epsilon | Mre::Const(_) | Mre::Star(_) => false,
        Mre::Alt(l, r) => must_use(x, l) && must_use(x, r),
        Mre::Concat(l, r) => must_use(x, l) || must_use(x, r),
        Mre::Bind(y, d, b) => {
            let in_body = y != x && must_use(x, b);
            in_body || (must_use(y, b) && must_use(x, d))
        }
    }
}

/// Constants and epsilons joined by concatenation in any nesting.
fn is_plain_string(r: &Mre) -> bool {
    match r {
        Mre::Epsilon | Mre::Const(_) => true,
        Mre::Concat(l, r) => is_plain_string(l) && is_plain_string(r),
        _ => false,
    }
}

fn env_names(tenv: &RegexTypeEnv) -> FreshNames {
    let mut names: Vec<String> = tenv.names().map(str::to_string).collect();
    for (_, ty) in tenv.entries() {
        names.extend(ty.binders().into_iter().map(str::to_string));
    }
    FreshNames::avoiding(names.iter().map(String::as_str))
}

fn check_bound(tenv: &RegexTypeEnv, exprs: &[&Mre]) -> Result<(), AmbError> {
    for r in exprs {
        if let Some(x) = free_vars(r).into_iter().find(|x| !tenv.contains(x)) {
            return Err(AmbError::UnboundVariable(x));
        }
    }
    Ok(())
}

impl Checker {
    pub fn new(bound: usize) -> Self {
        Checker { bound, ..Checker::default() }
    }

    /// Every value environment consistent with `tenv`, with values bounded
    /// by `bound`.
    fn envs(&self, tenv: &RegexTypeEnv, bound: usize) -> Result<Vec<RegexValueEnv>, OracleError> {
        let en = Enumerator::with_budget(bound, self.budget);
        let mut envs = vec![RegexValueEnv::new()];
        for (x, ty) in tenv.entries() {
            let mut next = Vec::new();
            for env in &envs {
                for v in en.regex(ty, env)? {
                    next.push(env.extend(x.clone(), v));
                }
                if next.len() > self.budget {
                    return Err(OracleError::BudgetExceeded(self.budget));
                }
            }
            envs = next;
        }
        Ok(envs)
    }

    /// Runs a bounded search for a counterexample, shrinking the bound
    /// until the search fits in the budget.
    fn confirm(
        &self,
        tenv: &RegexTypeEnv,
        search: impl Fn(&Enumerator, &RegexValueEnv) -> Result<Option<String>, OracleError>,
    ) -> AmbVerdict {
        let mut bound = self.bound;
        loop {
            let en = Enumerator::with_budget(bound, self.budget);
            let result = self.envs(tenv, bound).and_then(|envs| {
                for env in &envs {
                    if let Some(found) = search(&en, env)? {
                        return Ok(Some(found));
                    }
                }
                Ok(None)
            });
            match result {
                Ok(None) => return AmbVerdict::Unambiguous,
                Ok(Some(found)) => return AmbVerdict::PossiblyAmbiguous(format!("bounded search found {found}")),
                Err(_) if bound > 0 => bound -= 1,
                Err(e) => return AmbVerdict::PossiblyAmbiguous(format!("bounded search failed: {e}")),
            }
        }
    }

    pub fn check_unamb_alt(&self, tenv: &RegexTypeEnv, r1: &Mre, r2: &Mre) -> Result<AmbVerdict, AmbError> {
        check_bound(tenv, &[r1, r2])?;
        let (a1, a2) = (approximate(tenv, r1)?, approximate(tenv, r2)?);
        if let Some(w) = intersection_witness(&a1, &a2) {
            return Ok(AmbVerdict::PossiblyAmbiguous(format!(
                "alternation of `{r1}` and `{r2}`: {} can match either branch",
                quote(&w)
            )));
        }
        Ok(self.confirm(tenv, |en, env| {
            let (l1, l2) = (en.regex(r1, env)?, en.regex(r2, env)?);
            Ok(l1.intersection(&l2).next().map(|w| format!("{} in both branches", quote(w))))
        }))
    }

    pub fn check_unamb_concat(&self, tenv: &RegexTypeEnv, r1: &Mre, r2: &Mre) -> Result<AmbVerdict, AmbError> {
        check_bound(tenv, &[r1, r2])?;
        let (a1, a2) = (approximate(tenv, r1)?, approximate(tenv, r2)?);
        if let Some(x) = concat_overlap(&a1, &a2) {
            return Ok(AmbVerdict::PossiblyAmbiguous(format!(
                "concatenation of `{r1}` and `{r2}`: the left part can absorb {} from the start of the right part",
                quote(&x)
            )));
        }
        Ok(self.confirm(tenv, |en, env| {
            let (l1, l2) = (en.regex(r1, env)?, en.regex(r2, env)?);
            Ok(split_conflict(en.max_len, &l1, &l2))
        }))
    }

    pub fn check_unamb_iter(&self, tenv: &RegexTypeEnv, r: &Mre) -> Result<AmbVerdict, AmbError> {
        check_bound(tenv, &[r])?;
        let a = approximate(tenv, r)?;
        if nullable(&a) {
            return Ok(AmbVerdict::PossiblyAmbiguous(format!(
                "iteration of `{r}`: the body matches the empty string"
            )));
        }
        if let Some(x) = concat_overlap(&a, &Mre::star(a.clone())) {
            return Ok(AmbVerdict::PossiblyAmbiguous(format!(
                "iteration of `{r}`: one iteration can absorb {} from the next",
                quote(&x)
            )));
        }
        Ok(self.confirm(tenv, |en, env| {
            let lang = en.regex(r, env)?;
            if lang.contains("") {
                return Ok(Some("the empty string in the body".into()));
            }
            let closure = en.regex(&Mre::star(r.clone()), env)?;
            Ok(closure.iter().find(|s| decompositions(s, &lang) > 1).map(|s| format!("{} split two ways", quote(s))))
        }))
    }

    pub fn check_unamb_bind(&self, tenv: &RegexTypeEnv, x: &str, r1: &Mre, r2: &Mre) -> Result<AmbVerdict, AmbError> {
        check_bound(tenv, &[r1])?;
        check_bound(&tenv.extend(x, r1.clone()), &[r2])?;
        if !must_use(x, r2) {
            return Ok(AmbVerdict::PossiblyAmbiguous(format!(
                "binding of `{x}`: some strings of the body `{r2}` do not use `{x}`"
            )));
        }
        let mut fresh = env_names(tenv);
        let body = alpha_rename_with(r2, &mut fresh);
        let substituted = body.substitute(&HashMap::from([(x.to_string(), r1.clone())]));
        let inner = self.strongly_unambiguous(tenv, &substituted)?;
        if let AmbVerdict::PossiblyAmbiguous(why) = inner {
            return Ok(AmbVerdict::PossiblyAmbiguous(format!(
                "binding of `{x}`: the body with `{x}` replaced by its definition is {why}"
            )));
        }
        Ok(self.confirm(tenv, |en, env| {
            let mut seen: BTreeMap<String, String> = BTreeMap::new();
            for w in en.regex(r1, env)? {
                let inner = env.extend(x, w.clone());
                for s in en.regex(r2, &inner)? {
                    if let Some(prev) = seen.insert(s.clone(), w.clone()) {
                        if prev != w {
                            return Ok(Some(format!(
                                "{} from witnesses {} and {}",
                                quote(&s),
                                quote(&prev),
                                quote(&w)
                            )));
                        }
                    }
                }
            }
            Ok(None)
        }))
    }

    pub fn strongly_unambiguous(&self, tenv: &RegexTypeEnv, r: &Mre) -> Result<AmbVerdict, AmbError> {
        if !rtenv_well_formed(tenv) {
            return Err(AmbError::EnvIllFormed);
        }
        check_bound(tenv, &[r])?;
        let r = alpha_rename_with(r, &mut env_names(tenv));
        self.su(tenv, &r)
    }

    fn su(&self, tenv: &RegexTypeEnv, r: &Mre) -> Result<AmbVerdict, AmbError> {
        if is_plain_string(r) {
            return Ok(AmbVerdict::Unambiguous);
        }
        // The empty-language case never applies: there is no empty-set
        // constant, and every type is itself a non-empty expression.
        match r {
            Mre::Epsilon | Mre::Const(_) => Ok(AmbVerdict::Unambiguous),
            Mre::Star(inner) => self.check_unamb_iter(tenv, inner)?.and_then(|| self.su(tenv, inner)),
            Mre::Alt(l, rr) => self
                .check_unamb_alt(tenv, l, rr)?
                .and_then(|| self.su(tenv, l)?.and_then(|| self.su(tenv, rr))),
            Mre::Concat(l, rr) => self
                .check_unamb_concat(tenv, l, rr)?
                .and_then(|| self.su(tenv, l)?.and_then(|| self.su(tenv, rr))),
            Mre::Bind(x, d, b) => self.check_unamb_bind(tenv, x, d, b)?.and_then(|| {
                self.su(tenv, d)?.and_then(|| self.su(&tenv.extend(x.clone(), (**d).clone()), b))
            }),
            Mre::Var(x) => {
                let i = tenv.position(x).ok_or_else(|| AmbError::UnboundVariable(x.clone()))?;
                let ty = tenv.entries()[i].1.clone();
                self.su(&tenv.prefix(i), &ty)
            }
        }
    }
}

/// Number of ways `s` splits into non-empty pieces from `lang`, capped at 2.
fn decompositions(s: &str, lang: &Language) -> usize {
    let cuts: Vec<usize> = s.char_indices().map(|(i, _)| i).chain([s.len()]).collect();
    let mut ways = vec![0usize; cuts.len()];
    ways[0] = 1;
    for j in 1..cuts.len() {
        for i in 0..j {
            if ways[i] > 0 && lang.contains(&s[cuts[i]..cuts[j]]) {
                ways[j] = (ways[j] + ways[i]).min(2);
            }
        }
    }
    ways[cuts.len() - 1]
}

fn split_conflict(max_len: usize, l1: &Language, l2: &Language) -> Option<String> {
    let mut splits: BTreeMap<String, usize> = BTreeMap::new();
    for u in l1 {
        for v in l2 {
            if (u.chars().count() + v.chars().count()) > max_len {
                continue;
            }
            let s = format!("{u}{v}");
            if let Some(prev) = splits.insert(s.clone(), u.len()) {
                if prev != u.len() {
                    return Some(format!("{} split two ways", quote(&s)));
                }
            }
        }
    }
    None
}

pub fn check_unamb_iter(tenv: &RegexTypeEnv, r: &Mre) -> Result<AmbVerdict, AmbError> {
    Checker::default().check_unamb_iter(tenv, r)
}

pub fn check_unamb_concat(tenv: &RegexTypeEnv, r1: &Mre, r2: &Mre) -> Result<AmbVerdict, AmbError> {
    Checker::default().check_unamb_concat(tenv, r1, r2)
}

pub fn check_unamb_alt(tenv: &RegexTypeEnv, r1: &Mre, r2: &Mre) -> Result<AmbVerdict, AmbError> {
    Checker::default().check_unamb_alt(tenv, r1, r2)
}

pub fn check_unamb_bind(tenv: &RegexTypeEnv, x: &str, r1: &Mre, r2: &Mre) -> Result<AmbVerdict, AmbError> {
    Checker::default().check_unamb_bind(tenv, x, r1, r2)
}

pub fn strongly_unambiguous(tenv: &RegexTypeEnv, r: &Mre) -> Result<AmbVerdict, AmbError> {
    Checker::default().strongly_unambiguous(tenv, r)
}
