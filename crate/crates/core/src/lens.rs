//! Match-reference lenses: syntax, the type checker, and get/put
//! evaluation.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ambiguity::{AmbError, AmbVerdict, Checker};
use crate::mre::{
    alpha_eq, envs_well_formed, is_closed, FreshNames, LensTypeEnv, Mre, RegexTypeEnv, RegexValueEnv,
};
use crate::mrras::{close_with_values, compile, member_in_env, parse_with_order, Branch, ExploreOrder, ParseTree};
use crate::regular::Dfa;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Lens {
    Const(String, String),
    Id(Mre),
    Iter(Box<Lens>),
    Concat(Box<Lens>, Box<Lens>),
    /// Like `Concat`, but the target halves come out in reverse order.
    Swap(Box<Lens>, Box<Lens>),
    Or(Box<Lens>, Box<Lens>),
    Comp(Box<Lens>, Box<Lens>),
    Var(String),
    /// `link y = def in body`; `y` is in scope in `body` only.
    Link(String, Box<Lens>, Box<Lens>),
}

impl Lens {
    pub fn constant(s1: impl Into<String>, s2: impl Into<String>) -> Lens {
        Lens::Const(s1.into(), s2.into())
    }

    pub fn id(r: Mre) -> Lens {
        Lens::Id(r)
    }

    pub fn iter(l: Lens) -> Lens {
        Lens::Iter(Box::new(l))
    }

    pub fn concat(a: Lens, b: Lens) -> Lens {
        Lens::Concat(Box::new(a), Box::new(b))
    }

    pub fn swap(a: Lens, b: Lens) -> Lens {
        Lens::Swap(Box::new(a), Box::new(b))
    }

    pub fn or(a: Lens, b: Lens) -> Lens {
        Lens::Or(Box::new(a), Box::new(b))
    }

    pub fn comp(a: Lens, b: Lens) -> Lens {
        Lens::Comp(Box::new(a), Box::new(b))
    }

    pub fn var(y: impl Into<String>) -> Lens {
        Lens::Var(y.into())
    }

    pub fn link(y: impl Into<String>, def: Lens, body: Lens) -> Lens {
        Lens::Link(y.into(), Box::new(def), Box::new(body))
    }

    /// Left-nested concatenation of the given lenses.
    pub fn seq<I: IntoIterator<Item = Lens>>(items: I) -> Lens {
        let mut it = items.into_iter();
        let first = it.next().unwrap_or_else(|| Lens::constant("", ""));
        it.fold(first, Lens::concat)
    }
}

impl fmt::Display for Lens {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print_lens(self))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Get,
    Put,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LensType {
    pub source: Mre,
    pub target: Mre,
}

impl LensType {
    fn side(&self, dir: Direction) -> &Mre {
        match dir {
            Direction::Get => &self.source,
            Direction::Put => &self.target,
        }
    }
}

impl fmt::Display for LensType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <=> {}", self.source, self.target)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Source => "source",
            Side::Target => "target",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{rule}: type environments are not well-formed")]
    EnvIllFormed { rule: &'static str },
    #[error("IdT: `{0}` is not closed")]
    NotClosed(Mre),
    #[error("{rule}: {side} side is not unambiguous: {diagnostic}")]
    AmbiguousSide { rule: &'static str, side: Side, diagnostic: String },
    #[error("VarT: unbound lens variable `{0}`")]
    UnboundLensVariable(String),
    #[error("CompT: the first lens produces `{left}` but the second expects `{right}`")]
    CompMiddleMismatch { left: Mre, right: Mre },
    #[error("{rule}: unambiguity of the {side} side could not be decided: {reason}")]
    AmbiguityUnknown { rule: &'static str, side: Side, reason: String },
}

impl TypeError {
    pub fn code(&self) -> &'static str {
        match self {
            TypeError::EnvIllFormed { .. } => "env-ill-formed",
            TypeError::NotClosed(_) => "not-closed",
            TypeError::AmbiguousSide { .. } => "ambiguous",
            TypeError::UnboundLensVariable(_) => "unbound-lens-variable",
            TypeError::CompMiddleMismatch { .. } => "comp-mismatch",
            TypeError::AmbiguityUnknown { .. } => "ambiguity-unknown",
        }
    }

    /// The typing rule whose side condition failed.
    pub fn rule(&self) -> &'static str {
        match self {
            TypeError::EnvIllFormed { rule }
            | TypeError::AmbiguousSide { rule, .. }
            | TypeError::AmbiguityUnknown { rule, .. } => rule,
            TypeError::NotClosed(_) => "IdT",
            TypeError::UnboundLensVariable(_) => "VarT",
            TypeError::CompMiddleMismatch { .. } => "CompT",
        }
    }
}

/// A lens annotated with the type of every sub-lens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Typed {
    pub node: TypedNode,
    pub ty: LensType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypedNode {
    Const(String, String),
    Id(Mre),
    Iter(Box<Typed>),
    Concat(Box<Typed>, Box<Typed>),
    Swap(Box<Typed>, Box<Typed>),
    Or(Box<Typed>, Box<Typed>),
    Comp(Box<Typed>, Box<Typed>),
    Var(String),
    /// `x1` and `x2` are the fresh regex variables chosen for `y`.
    Link { y: String, x1: String, x2: String, def: Box<Typed>, body: Box<Typed> },
}

struct TypeChecker {
    checker: Checker,
    fresh: FreshNames,
}

impl TypeChecker {
    fn require(
        &self,
        rule: &'static str,
        side: Side,
        verdict: Result<AmbVerdict, AmbError>,
    ) -> Result<(), TypeError> {
        match verdict {
            Ok(AmbVerdict::Unambiguous) => Ok(()),
            Ok(AmbVerdict::PossiblyAmbiguous(diagnostic)) => {
                Err(TypeError::AmbiguousSide { rule, side, diagnostic })
            }
            Err(e) => Err(TypeError::AmbiguityUnknown { rule, side, reason: e.to_string() }),
        }
    }

    fn base(&self, rule: &'static str, lenv: &LensTypeEnv, renv: &RegexTypeEnv) -> Result<(), TypeError> {
        if envs_well_formed(lenv, renv) {
            Ok(())
        } else {
            Err(TypeError::EnvIllFormed { rule })
        }
    }

    fn pair(
        &mut self,
        lenv: &LensTypeEnv,
        renv: &RegexTypeEnv,
        a: &Lens,
        b: &Lens,
    ) -> Result<(Typed, Typed), TypeError> {
        Ok((self.check(lenv, renv, a)?, self.check(lenv, renv, b)?))
    }

    fn check(&mut self, lenv: &LensTypeEnv, renv: &RegexTypeEnv, l: &Lens) -> Result<Typed, TypeError> {
        let c = self.checker;
        let (node, ty) = match l {
            Lens::Const(s1, s2) => {
                self.base("ConstT", lenv, renv)?;
                (TypedNode::Const(s1.clone(), s2.clone()), LensType { source: Mre::lit(s1), target: Mre::lit(s2) })
            }
            Lens::Var(y) => {
                self.base("VarT", lenv, renv)?;
                let (x1, x2) = lenv.lookup(y).ok_or_else(|| TypeError::UnboundLensVariable(y.clone()))?;
                (TypedNode::Var(y.clone()), LensType { source: Mre::var(x1.clone()), target: Mre::var(x2.clone()) })
            }
            Lens::Id(r) => {
                self.base("IdT", lenv, renv)?;
                if !is_closed(r) {
                    return Err(TypeError::NotClosed(r.clone()));
                }
                self.require("IdT", Side::Source, c.strongly_unambiguous(&RegexTypeEnv::new(), r))?;
                (TypedNode::Id(r.clone()), LensType { source: r.clone(), target: r.clone() })
            }
            Lens::Iter(inner) => {
                let t = self.check(lenv, renv, inner)?;
                self.require("IterT", Side::Source, c.check_unamb_iter(renv, &t.ty.source))?;
                self.require("IterT", Side::Target, c.check_unamb_iter(renv, &t.ty.target))?;
                let ty = LensType { source: Mre::star(t.ty.source.clone()), target: Mre::star(t.ty.target.clone()) };
                (TypedNode::Iter(Box::new(t)), ty)
            }
            Lens::Or(a, b) => {
                let (ta, tb) = self.pair(lenv, renv, a, b)?;
                self.require("OrT", Side::Source, c.check_unamb_alt(renv, &ta.ty.source, &tb.ty.source))?;
                self.require("OrT", Side::Target, c.check_unamb_alt(renv, &ta.ty.target, &tb.ty.target))?;
                let ty = LensType {
                    source: Mre::alt(ta.ty.source.clone(), tb.ty.source.clone()),
                    target: Mre::alt(ta.ty.target.clone(), tb.ty.target.clone()),
                };
                (TypedNode::Or(Box::new(ta), Box::new(tb)), ty)
            }
            Lens::Concat(a, b) => {
                let (ta, tb) = self.pair(lenv, renv, a, b)?;
                self.require("ConcatT", Side::Source, c.check_unamb_concat(renv, &ta.ty.source, &tb.ty.source))?;
                self.require("ConcatT", Side::Target, c.check_unamb_concat(renv, &ta.ty.target, &tb.ty.target))?;
                let ty = LensType {
                    source: Mre::concat(ta.ty.source.clone(), tb.ty.source.clone()),
                    target: Mre::concat(ta.ty.target.clone(), tb.ty.target.clone()),
                };
                (TypedNode::Concat(Box::new(ta), Box::new(tb)), ty)
            }
            Lens::Swap(a, b) => {
                let (ta, tb) = self.pair(lenv, renv, a, b)?;
                self.require("SwapT", Side::Source, c.check_unamb_concat(renv, &ta.ty.source, &tb.ty.source))?;
                self.require("SwapT", Side::Target, c.check_unamb_concat(renv, &tb.ty.target, &ta.ty.target))?;
                let ty = LensType {
                    source: Mre::concat(ta.ty.source.clone(), tb.ty.source.clone()),
                    target: Mre::concat(tb.ty.target.clone(), ta.ty.target.clone()),
                };
                (TypedNode::Swap(Box::new(ta), Box::new(tb)), ty)
            }
            Lens::Comp(a, b) => {
                let (ta, tb) = self.pair(lenv, renv, a, b)?;
                if !alpha_eq(&ta.ty.target, &tb.ty.source) {
                    return Err(TypeError::CompMiddleMismatch {
                        left: ta.ty.target.clone(),
                        right: tb.ty.source.clone(),
                    });
                }
                let ty = LensType { source: ta.ty.source.clone(), target: tb.ty.target.clone() };
                (TypedNode::Comp(Box::new(ta), Box::new(tb)), ty)
            }
            Lens::Link(y, def, body) => {
                let td = self.check(lenv, renv, def)?;
                let x1 = self.fresh.fresh(y);
                let x2 = self.fresh.fresh(y);
                let lenv2 = lenv.extend(y.clone(), (x1.clone(), x2.clone()));
                let renv2 = renv.extend(x1.clone(), td.ty.source.clone()).extend(x2.clone(), td.ty.target.clone());
                let tb = self.check(&lenv2, &renv2, body)?;
                self.require("LinkT", Side::Source, c.check_unamb_bind(renv, &x1, &td.ty.source, &tb.ty.source))?;
                self.require("LinkT", Side::Target, c.check_unamb_bind(renv, &x2, &td.ty.target, &tb.ty.target))?;
                let ty = LensType {
                    source: Mre::bind(x1.clone(), td.ty.source.clone(), tb.ty.source.clone()),
                    target: Mre::bind(x2.clone(), td.ty.target.clone(), tb.ty.target.clone()),
                };
                (TypedNode::Link { y: y.clone(), x1, x2, def: Box::new(td), body: Box::new(tb) }, ty)
            }
        };
        Ok(Typed { node, ty })
    }
}

fn used_names(lenv: &LensTypeEnv, renv: &RegexTypeEnv) -> FreshNames {
    let mut names: Vec<String> = renv.names().map(str::to_string).collect();
    names.extend(lenv.names().map(str::to_string));
    for (_, ty) in renv.entries() {
        names.extend(ty.binders().into_iter().map(str::to_string));
    }
    FreshNames::avoiding(names.iter().map(String::as_str))
}

pub fn typecheck(lenv: &LensTypeEnv, renv: &RegexTypeEnv, l: &Lens) -> Result<Typed, TypeError> {
    typecheck_with(Checker::default(), lenv, renv, l)
}

pub fn typecheck_with(checker: Checker, lenv: &LensTypeEnv, renv: &RegexTypeEnv, l: &Lens) -> Result<Typed, TypeError> {
    let mut tc = TypeChecker { checker, fresh: used_names(lenv, renv) };
    tc.check(lenv, renv, l)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("input does not match `{expected}` (stopped at byte {position})")]
    ParseFailure { position: usize, expected: Mre },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

impl EvalError {
    pub fn code(&self) -> &'static str {
        match self {
            EvalError::Type(e) => e.code(),
            EvalError::ParseFailure { .. } => "parse-failure",
            EvalError::UnboundVariable(_) => "unbound-variable",
            EvalError::InvariantViolation(_) => "invariant-violation",
        }
    }
}

/// The operational environments agree: every lens variable's regex
/// variables are typed and valued, and every value is in the language of
/// its type.
pub fn step_envs_well_formed(lenv: &LensTypeEnv, renv: &RegexTypeEnv, venv: &RegexValueEnv) -> bool {
    let bound = |x: &str| renv.contains(x) && venv.contains(x);
    if !lenv.entries().iter().all(|(_, (x1, x2))| bound(x1) && bound(x2)) {
        return false;
    }
    venv.entries().iter().enumerate().all(|(i, (x, v))| match renv.lookup(x) {
        Some(ty) => member_in_env(ty, &venv.prefix(i), v).unwrap_or(false),
        None => false,
    })
}

struct Envs {
    lenv: LensTypeEnv,
    renv: RegexTypeEnv,
    venv: RegexValueEnv,
    order: ExploreOrder,
}

impl Envs {
    fn base(&self) -> Result<(), EvalError> {
        if step_envs_well_formed(&self.lenv, &self.renv, &self.venv) {
            Ok(())
        } else {
            Err(EvalError::InvariantViolation("operational environments are not well-formed".into()))
        }
    }

    fn parse(&self, r: &Mre, s: &str) -> Result<ParseTree, EvalError> {
        let closed = close_with_values(r, &self.venv);
        parse_with_order(&closed, s, self.order).map_err(|_| EvalError::ParseFailure { position: failure_position(&closed, s), expected: r.clone() })
    }
}

/// How far into `s` a match against `r` can get, judged on the expression
/// with variables replaced by their types.
fn failure_position(r: &Mre, s: &str) -> usize {
    match crate::ambiguity::approximate(&RegexTypeEnv::new(), r) {
        Ok(a) => Dfa::from_mre(&a, &Default::default()).viable_prefix(s),
        Err(_) => 0,
    }
}

fn children(tree: &ParseTree) -> Result<(String, String), EvalError> {
    match tree {
        ParseTree::Concat { left, right, .. } => Ok((left.text(), right.text())),
        other => Err(EvalError::InvariantViolation(format!("expected a concatenation, parsed {other:?}"))),
    }
}

fn run(t: &Typed, dir: Direction, s: &str, env: &Envs) -> Result<String, EvalError> {
    let side = t.ty.side(dir);
    match &t.node {
        TypedNode::Const(s1, s2) => {
            env.base()?;
            let (sj, sk) = match dir {
                Direction::Get => (s1, s2),
                Direction::Put => (s2, s1),
            };
            if s != sj {
                let position = s.bytes().zip(sj.bytes()).take_while(|(a, b)| a == b).count();
                return Err(EvalError::ParseFailure { position, expected: side.clone() });
            }
            Ok(sk.clone())
        }
        TypedNode::Var(y) => {
            env.base()?;
            let (x1, x2) = env.lenv.lookup(y).ok_or_else(|| EvalError::UnboundVariable(y.clone()))?;
            let (xj, xk) = match dir {
                Direction::Get => (x1, x2),
                Direction::Put => (x2, x1),
            };
            let value = |x: &String| env.venv.lookup(x).ok_or_else(|| EvalError::UnboundVariable(x.clone()));
            let vj = value(xj)?;
            if s != vj {
                let position = s.bytes().zip(vj.bytes()).take_while(|(a, b)| a == b).count();
                return Err(EvalError::ParseFailure { position, expected: Mre::var(xj.clone()) });
            }
            Ok(value(xk)?.clone())
        }
        TypedNode::Id(r) => {
            env.base()?;
            env.parse(r, s)?;
            Ok(s.to_string())
        }
        TypedNode::Iter(inner) => match env.parse(side, s)? {
            ParseTree::Star { iterations } => {
                let mut out = String::new();
                for it in iterations {
                    out.push_str(&run(inner, dir, &it.text(), env)?);
                }
                Ok(out)
            }
            other => Err(EvalError::InvariantViolation(format!("expected an iteration, parsed {other:?}"))),
        },
        TypedNode::Concat(a, b) => {
            let (sa, sb) = children(&env.parse(side, s)?)?;
            Ok(run(a, dir, &sa, env)? + &run(b, dir, &sb, env)?)
        }
        TypedNode::Swap(a, b) => {
            let (first, second) = children(&env.parse(side, s)?)?;
            match dir {
                Direction::Get => Ok(run(b, dir, &second, env)? + &run(a, dir, &first, env)?),
                // The target is laid out as b's part then a's part.
                Direction::Put => Ok(run(a, dir, &second, env)? + &run(b, dir, &first, env)?),
            }
        }
        TypedNode::Or(a, b) => match env.parse(side, s)? {
            ParseTree::Alt { branch, .. } => match branch {
                Branch::Left => run(a, dir, s, env),
                Branch::Right => run(b, dir, s, env),
            },
            other => Err(EvalError::InvariantViolation(format!("expected an alternation, parsed {other:?}"))),
        },
        TypedNode::Comp(a, b) => {
            env.parse(side, s)?;
            match dir {
                Direction::Get => run(b, dir, &run(a, dir, s, env)?, env),
                Direction::Put => run(a, dir, &run(b, dir, s, env)?, env),
            }
        }
        TypedNode::Link { y, x1, x2, def, body } => {
            let witness = match env.parse(side, s)? {
                ParseTree::Bind { witness: Some(w), .. } => w,
                other => {
                    return Err(EvalError::InvariantViolation(format!("expected a bound witness, parsed {other:?}")))
                }
            };
            let image = run(def, dir, &witness, env)?;
            let (v1, v2) = match dir {
                Direction::Get => (witness, image),
                Direction::Put => (image, witness),
            };
            let inner = Envs {
                lenv: env.lenv.extend(y.clone(), (x1.clone(), x2.clone())),
                renv: env.renv.extend(x1.clone(), def.ty.source.clone()).extend(x2.clone(), def.ty.target.clone()),
                venv: env.venv.extend(x1.clone(), v1).extend(x2.clone(), v2),
                order: env.order,
            };
            run(body, dir, s, &inner)
        }
    }
}

/// Evaluates an already type-checked lens.
pub fn evaluate(
    t: &Typed,
    dir: Direction,
    input: &str,
    lenv: &LensTypeEnv,
    renv: &RegexTypeEnv,
    venv: &RegexValueEnv,
) -> Result<String, EvalError> {
    evaluate_with_order(t, dir, input, lenv, renv, venv, ExploreOrder::Canonical)
}

/// Like [`evaluate`], with the automaton search order chosen by the caller.
/// Well-typed lenses give the same result under every order.
pub fn evaluate_with_order(
    t: &Typed,
    dir: Direction,
    input: &str,
    lenv: &LensTypeEnv,
    renv: &RegexTypeEnv,
    venv: &RegexValueEnv,
    order: ExploreOrder,
) -> Result<String, EvalError> {
    let env = Envs { lenv: lenv.clone(), renv: renv.clone(), venv: venv.clone(), order };
    let out = run(t, dir, input, &env)?;
    let other = match dir {
        Direction::Get => Direction::Put,
        Direction::Put => Direction::Get,
    };
    let closed = close_with_values(t.ty.side(other), venv);
    match compile(&closed) {
        Ok(m) if m.accepts(&out) => Ok(out),
        Ok(_) => Err(EvalError::InvariantViolation(format!("output {out:?} is outside `{}`", t.ty.side(other)))),
        Err(e) => Err(EvalError::InvariantViolation(e.to_string())),
    }
}

pub fn eval(
    l: &Lens,
    dir: Direction,
    input: &str,
    lenv: &LensTypeEnv,
    renv: &RegexTypeEnv,
    venv: &RegexValueEnv,
) -> Result<String, EvalError> {
    let t = typecheck(lenv, renv, l)?;
    evaluate(&t, dir, input, lenv, renv, venv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mre::alpha_eq;

    fn aa() -> Lens {
        Lens::link(
            "y",
            Lens::iter(Lens::constant("a", "A")),
            Lens::seq([Lens::var("y"), Lens::id(Mre::Const('b')), Lens::var("y")]),
        )
    }

    fn empty() -> (LensTypeEnv, RegexTypeEnv, RegexValueEnv) {
        (LensTypeEnv::new(), RegexTypeEnv::new(), RegexValueEnv::new())
    }

    #[test]
    fn link_get_and_put() {
        let (l, r, v) = empty();
        assert_eq!(eval(&aa(), Direction::Get, "aabaa", &l, &r, &v).unwrap(), "AAbAA");
        assert_eq!(eval(&aa(), Direction::Put, "AbA", &l, &r, &v).unwrap(), "aba");
        assert_eq!(eval(&aa(), Direction::Get, "b", &l, &r, &v).unwrap(), "b");
    }

    #[test]
    fn link_type_is_a_bind() {
        let (l, r, _) = empty();
        let t = typecheck(&l, &r, &aa()).unwrap();
        let expected = Mre::bind(
            "z",
            Mre::star(Mre::Const('a')),
            Mre::seq([Mre::var("z"), Mre::Const('b'), Mre::var("z")]),
        );
        assert!(alpha_eq(&t.ty.source, &expected), "{}", t.ty);
    }

    #[test]
    fn ambiguous_or_rejected() {
        let (l, r, _) = empty();
        let bad = Lens::or(Lens::constant("a", "A"), Lens::constant("a", "B"));
        let err = typecheck(&l, &r, &bad).unwrap_err();
        assert!(matches!(err, TypeError::AmbiguousSide { rule: "OrT", side: Side::Source, .. }), "{err}");
        assert!(typecheck(&l, &r, &Lens::constant("a", "A")).is_ok());
        assert!(typecheck(&l, &r, &Lens::constant("a", "B")).is_ok());
    }

    #[test]
    fn const_type() {
        let (l, r, _) = empty();
        let t = typecheck(&l, &r, &Lens::constant("s1", "s2")).unwrap();
        assert_eq!(t.ty, LensType { source: Mre::lit("s1"), target: Mre::lit("s2") });
    }

    #[test]
    fn comp_types_and_evaluates() {
        let (l, r, v) = empty();
        let c = Lens::comp(Lens::constant("a", "b"), Lens::constant("b", "c"));
        let t = typecheck(&l, &r, &c).unwrap();
        assert_eq!(t.ty.target, Mre::lit("c"));
        assert_eq!(evaluate(&t, Direction::Get, "a", &l, &r, &v).unwrap(), "c");
        assert_eq!(evaluate(&t, Direction::Put, "c", &l, &r, &v).unwrap(), "a");
        let bad = Lens::comp(Lens::constant("a", "b"), Lens::constant("c", "d"));
        assert!(matches!(typecheck(&l, &r, &bad), Err(TypeError::CompMiddleMismatch { .. })));
    }

    #[test]
    fn swap_reorders() {
        let (l, r, v) = empty();
        let s = Lens::swap(Lens::constant("a", "A"), Lens::constant("b", "B"));
        assert_eq!(eval(&s, Direction::Get, "ab", &l, &r, &v).unwrap(), "BA");
        assert_eq!(eval(&s, Direction::Put, "BA", &l, &r, &v).unwrap(), "ab");
    }

    #[test]
    fn parse_failure_reports_position() {
        let (l, r, v) = empty();
        let err = eval(&aa(), Direction::Get, "aacaa", &l, &r, &v).unwrap_err();
        assert!(matches!(err, EvalError::ParseFailure { position: 2, .. }), "{err:?}");
    }

    #[test]
    fn unbound_lens_variable() {
        let (l, r, _) = empty();
        assert_eq!(typecheck(&l, &r, &Lens::var("q")), Err(TypeError::UnboundLensVariable("q".into())));
    }

    #[test]
    fn step_environments() {
        let (l, r, v) = empty();
        assert!(step_envs_well_formed(&l, &r, &v));
        let l = LensTypeEnv::new().extend("y", ("x1".to_string(), "x2".to_string()));
        let r = RegexTypeEnv::new()
            .extend("x1", Mre::star(Mre::Const('a')))
            .extend("x2", Mre::star(Mre::Const('A')));
        let v = RegexValueEnv::new().extend("x1", "aa".to_string()).extend("x2", "AA".to_string());
        assert!(step_envs_well_formed(&l, &r, &v));
        let missing = RegexValueEnv::new().extend("x1", "aa".to_string());
        assert!(!step_envs_well_formed(&l, &r, &missing));
        let wrong = RegexValueEnv::new().extend("x1", "ab".to_string()).extend("x2", "AA".to_string());
        assert!(!step_envs_well_formed(&l, &r, &wrong));
    }
}
