//! Turning an accepting trace back into a parse tree over the original
//! expression. Every transition remembers which node of its partial regex
//! created it, so the trace can be read by recursive descent.

use std::collections::HashMap;

use thiserror::Error;

use super::{compile, AutSymbol, ExploreOrder, MrrasError, Mrras, Role, Rule, StepRecord, Trace};
use crate::mre::{alpha_rename, base_name, Mre};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("input is not in the language")]
    NoMatch,
    #[error(transparent)]
    Compile(#[from] MrrasError),
    #[error("trace does not fit the expression: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Left,
    Right,
}

/// A derivation of a string, shaped like the expression it was parsed with.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParseTree {
    Epsilon,
    Const(char),
    Var { name: String, text: String },
    Star { iterations: Vec<ParseTree> },
    Alt { branch: Branch, tree: Box<ParseTree> },
    /// `split` is the byte length of the left part.
    Concat { split: usize, left: Box<ParseTree>, right: Box<ParseTree> },
    /// `witness` and `def` are absent when the body never used the variable.
    Bind { name: String, witness: Option<String>, def: Option<Box<ParseTree>>, body: Box<ParseTree> },
}

impl ParseTree {
    pub fn text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out);
        out
    }

    fn write_text(&self, out: &mut String) {
        match self {
            ParseTree::Epsilon => {}
            ParseTree::Const(c) => out.push(*c),
            ParseTree::Var { text, .. } => out.push_str(text),
            ParseTree::Star { iterations } => iterations.iter().for_each(|t| t.write_text(out)),
            ParseTree::Alt { tree, .. } => tree.write_text(out),
            ParseTree::Concat { left, right, .. } => {
                left.write_text(out);
                right.write_text(out);
            }
            ParseTree::Bind { body, .. } => body.write_text(out),
        }
    }
}

pub fn parse(r: &Mre, w: &str) -> Result<ParseTree, ParseError> {
    parse_with_order(r, w, ExploreOrder::Canonical)
}

pub fn parse_with_order(r: &Mre, w: &str, order: ExploreOrder) -> Result<ParseTree, ParseError> {
    let renamed = alpha_rename(r);
    let m = compile(&renamed)?;
    let trace = m.search(w, order).ok_or(ParseError::NoMatch)?;
    let tokens = group_calls(&trace)?;
    let mut defs = HashMap::new();
    collect_defs(&renamed, &mut defs);
    let mut folder = Folder { m: &m, defs, slots: HashMap::new() };
    let mut i = 0;
    let tree = folder.fold(&renamed, 0, &tokens, &mut i)?;
    if i != tokens.len() {
        return Err(ParseError::Malformed("trailing steps".into()));
    }
    Ok(tree)
}

/// One step of the active automaton, or a whole excursion into a variable
/// automaton from `SwitchInit` to the matching `SwitchReturn`.
enum Token {
    Step(StepRecord),
    Call { enter: StepRecord, body: Vec<Token> },
}

fn group_calls(trace: &Trace) -> Result<Vec<Token>, ParseError> {
    let mut frames: Vec<(Option<StepRecord>, Vec<Token>)> = vec![(None, Vec::new())];
    for rec in &trace.steps {
        match rec.rule {
            Rule::SwitchInit => frames.push((Some(rec.clone()), Vec::new())),
            Rule::SwitchReturn => {
                let (enter, body) = frames.pop().expect("frame stack starts non-empty");
                let enter = enter.ok_or_else(|| ParseError::Malformed("unmatched return".into()))?;
                frames
                    .last_mut()
                    .ok_or_else(|| ParseError::Malformed("unmatched return".into()))?
                    .1
                    .push(Token::Call { enter, body });
            }
            _ => frames.last_mut().expect("frame stack starts non-empty").1.push(Token::Step(rec.clone())),
        }
    }
    match frames.pop() {
        Some((None, top)) if frames.is_empty() => Ok(top),
        _ => Err(ParseError::Malformed("unreturned call".into())),
    }
}

fn collect_defs<'a>(r: &'a Mre, out: &mut HashMap<String, &'a Mre>) {
    match r {
        Mre::Epsilon | Mre::Const(_) | Mre::Var(_) => {}
        Mre::Star(inner) => collect_defs(inner, out),
        Mre::Alt(l, r) | Mre::Concat(l, r) => {
            collect_defs(l, out);
            collect_defs(r, out);
        }
        Mre::Bind(x, d, b) => {
            out.insert(x.clone(), d);
            collect_defs(d, out);
            collect_defs(b, out);
        }
    }
}

/// Size of the partial regex an MRE translates to: a binder keeps only its
/// body in place.
fn partial_size(r: &Mre) -> usize {
    match r {
        Mre::Epsilon | Mre::Const(_) | Mre::Var(_) => 1,
        Mre::Star(inner) => 1 + partial_size(inner),
        Mre::Alt(l, r) | Mre::Concat(l, r) => 1 + partial_size(l) + partial_size(r),
        Mre::Bind(_, _, b) => 1 + partial_size(b),
    }
}

struct Folder<'a> {
    m: &'a Mrras,
    defs: HashMap<String, &'a Mre>,
    /// Witness and its derivation for each variable currently in scope.
    slots: HashMap<String, Option<(String, ParseTree)>>,
}

impl Folder<'_> {
    fn origin(&self, tok: &Token) -> Option<(Role, usize)> {
        let rec = match tok {
            Token::Step(r) => r,
            Token::Call { enter, .. } => enter,
        };
        rec.transition.map(|t| {
            let o = self.m.transition(t).origin;
            (o.role, o.node)
        })
    }

    fn peek(&self, toks: &[Token], i: usize) -> Option<(Role, usize)> {
        toks.get(i).and_then(|t| self.origin(t))
    }

    fn expect(&self, toks: &[Token], i: &mut usize, role: Role, node: usize) -> Result<(), ParseError> {
        if self.peek(toks, *i) == Some((role, node)) {
            *i += 1;
            Ok(())
        } else {
            Err(ParseError::Malformed(format!("expected {role:?} of node {node} at step {i}")))
        }
    }

    fn fold(&mut self, r: &Mre, node: usize, toks: &[Token], i: &mut usize) -> Result<ParseTree, ParseError> {
        match r {
            Mre::Epsilon => {
                self.expect(toks, i, Role::EpsLeaf, node)?;
                Ok(ParseTree::Epsilon)
            }
            Mre::Const(c) => {
                self.expect(toks, i, Role::Const, node)?;
                Ok(ParseTree::Const(*c))
            }
            Mre::Var(x) => {
                if self.peek(toks, *i) != Some((Role::Ref, node)) {
                    return Err(ParseError::Malformed(format!("expected reference to {x}")));
                }
                let name = base_name(x).to_string();
                let text = match &toks[*i] {
                    Token::Step(rec) if rec.rule == Rule::ConsumeVar => rec.consumed.clone(),
                    Token::Call { enter, body } => {
                        let t = self.m.transition(enter.transition.expect("SwitchInit follows an edge"));
                        let AutSymbol::Ref(_) = t.sym else {
                            return Err(ParseError::Malformed("call without reference".into()));
                        };
                        let def = *self
                            .defs
                            .get(x)
                            .ok_or_else(|| ParseError::Malformed(format!("no definition for {x}")))?;
                        let mut j = 0;
                        let tree = self.fold(def, 0, body, &mut j)?;
                        if j != body.len() {
                            return Err(ParseError::Malformed(format!("definition of {x} left steps")));
                        }
                        let text = tree.text();
                        self.slots.insert(x.clone(), Some((text.clone(), tree)));
                        text
                    }
                    Token::Step(_) => return Err(ParseError::Malformed(format!("bad step for {x}"))),
                };
                *i += 1;
                Ok(ParseTree::Var { name, text })
            }
            Mre::Star(inner) => {
                let mut iterations = Vec::new();
                while self.peek(toks, *i) == Some((Role::StarEnter, node)) {
                    *i += 1;
                    iterations.push(self.fold(inner, node + 1, toks, i)?);
                    if self.peek(toks, *i) == Some((Role::StarLoop, node)) {
                        *i += 1;
                    } else {
                        break;
                    }
                }
                Ok(ParseTree::Star { iterations })
            }
            Mre::Alt(l, rr) => match self.peek(toks, *i) {
                Some((Role::AltLeft, n)) if n == node => {
                    *i += 1;
                    let tree = self.fold(l, node + 1, toks, i)?;
                    Ok(ParseTree::Alt { branch: Branch::Left, tree: Box::new(tree) })
                }
                Some((Role::AltRight, n)) if n == node => {
                    *i += 1;
                    let tree = self.fold(rr, node + 1 + partial_size(l), toks, i)?;
                    Ok(ParseTree::Alt { branch: Branch::Right, tree: Box::new(tree) })
                }
                _ => Err(ParseError::Malformed(format!("expected a branch of node {node}"))),
            },
            Mre::Concat(l, rr) => {
                let left = self.fold(l, node + 1, toks, i)?;
                self.expect(toks, i, Role::ConcatJoin, node)?;
                let right = self.fold(rr, node + 1 + partial_size(l), toks, i)?;
                Ok(ParseTree::Concat { split: left.text().len(), left: Box::new(left), right: Box::new(right) })
            }
            Mre::Bind(x, _, body) => {
                self.expect(toks, i, Role::ScopeOpen, node)?;
                let saved = self.slots.insert(x.clone(), None);
                let body = self.fold(body, node + 1, toks, i)?;
                self.expect(toks, i, Role::ScopeClose, node)?;
                let slot = self.slots.remove(x).flatten();
                if let Some(s) = saved {
                    self.slots.insert(x.clone(), s);
                }
                let (witness, def) = match slot {
                    Some((w, t)) => (Some(w), Some(Box::new(t))),
                    None => (None, None),
                };
                Ok(ParseTree::Bind { name: base_name(x).to_string(), witness, def, body: Box::new(body) })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xcx() -> Mre {
        Mre::bind("x", Mre::star(Mre::Const('a')), Mre::seq([Mre::var("x"), Mre::Const('c'), Mre::var("x")]))
    }

    #[test]
    fn bind_witness_and_splits() {
        let t = parse(&xcx(), "aca").unwrap();
        let ParseTree::Bind { name, witness, def, body } = &t else { panic!("{t:?}") };
        assert_eq!(name, "x");
        assert_eq!(witness.as_deref(), Some("a"));
        assert_eq!(def.as_ref().unwrap().text(), "a");
        let ParseTree::Concat { left, right, .. } = body.as_ref() else { panic!() };
        let ParseTree::Concat { left: x1, right: c, .. } = left.as_ref() else { panic!() };
        assert_eq!((x1.text(), c.text(), right.text()), ("a".into(), "c".into(), "a".into()));
        assert_eq!(t.text(), "aca");
    }

    #[test]
    fn const_leaf() {
        assert_eq!(parse(&Mre::Const('a'), "a").unwrap(), ParseTree::Const('a'));
    }

    #[test]
    fn star_iterations() {
        let r = Mre::concat(Mre::star(Mre::Const('a')), Mre::Const('b'));
        let t = parse(&r, "aab").unwrap();
        let ParseTree::Concat { split, left, .. } = &t else { panic!() };
        assert_eq!(*split, 2);
        assert_eq!(**left, ParseTree::Star { iterations: vec![ParseTree::Const('a'), ParseTree::Const('a')] });
    }

    #[test]
    fn no_match() {
        assert_eq!(parse(&xcx(), "acaa"), Err(ParseError::NoMatch));
    }

    #[test]
    fn unused_binder_has_no_witness() {
        let r = Mre::bind("x", Mre::star(Mre::Const('a')), Mre::Const('b'));
        let ParseTree::Bind { witness, .. } = parse(&r, "b").unwrap() else { panic!() };
        assert_eq!(witness, None);
    }

    #[test]
    fn nested_definitions() {
        // bind x : "a"* in bind y : x . "b" in y . "c" . y
        let r = Mre::bind(
            "x",
            Mre::star(Mre::Const('a')),
            Mre::bind(
                "y",
                Mre::concat(Mre::var("x"), Mre::Const('b')),
                Mre::seq([Mre::var("y"), Mre::Const('c'), Mre::var("y")]),
            ),
        );
        let t = parse(&r, "aabcaab").unwrap();
        let ParseTree::Bind { witness: wx, body, .. } = &t else { panic!() };
        assert_eq!(wx.as_deref(), Some("aa"));
        let ParseTree::Bind { witness: wy, .. } = body.as_ref() else { panic!() };
        assert_eq!(wy.as_deref(), Some("aab"));
    }

    #[test]
    fn orders_agree_on_unambiguous_input() {
        let r = Mre::star(xcx());
        let a = parse_with_order(&r, "acacc", ExploreOrder::Canonical).unwrap();
        let b = parse_with_order(&r, "acacc", ExploreOrder::Reverse).unwrap();
        let c = parse_with_order(&r, "acacc", ExploreOrder::Shuffled(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
