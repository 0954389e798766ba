//! Text syntax for expressions and lenses.
//!
//! ```text
//! regex := "bind" IDENT ":" regex "in" regex | alt
//! alt   := cat ("|" cat)*
//! cat   := post ("." post)*
//! post  := atom "*"*
//! atom  := STRING | CLASS | "eps" | IDENT | "(" regex ")"
//!
//! lens  := "link" IDENT "=" lens "in" lens | comp
//! comp  := or (";" or)*
//! or    := lcat ("|" lcat)*
//! lcat  := lpost (("." | "~") lpost)*
//! lpost := latom "*"*
//! latom := "const" "(" STRING "," STRING ")" | STRING "<->" STRING
//!        | "id" "(" regex ")" | IDENT | "(" lens ")"
//!
//! file  := ("main"? IDENT ":=" (regex | lens) ";")*
//! ```

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::lens::Lens;
use crate::mre::Mre;

const KEYWORDS: [&str; 7] = ["bind", "in", "eps", "link", "const", "id", "main"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: `{name}` is a {found}, expected a {expected}")]
    WrongKind { line: usize, col: usize, name: String, found: &'static str, expected: &'static str },
    #[error("{line}:{col}: `{name}` refers to itself")]
    Recursive { line: usize, col: usize, name: String },
    #[error("{line}:{col}: `{name}` is defined twice")]
    Duplicate { line: usize, col: usize, name: String },
    #[error("{line}:{col}: more than one definition is marked main")]
    SecondMain { line: usize, col: usize },
}

impl DslError {
    /// Line and column of the error.
    pub fn position(&self) -> (usize, usize) {
        match *self {
            DslError::Syntax { line, col, .. }
            | DslError::WrongKind { line, col, .. }
            | DslError::Recursive { line, col, .. }
            | DslError::Duplicate { line, col, .. }
            | DslError::SecondMain { line, col } => (line, col),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Str(String),
    Class(Vec<char>),
    Ident(String),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Str(s) => write!(f, "string {}", quote(s)),
            Tok::Class(_) => f.write_str("character class"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Kw(k) | Tok::Sym(k) => write!(f, "`{k}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn syntax(p: Pos, msg: impl Into<String>) -> DslError {
    DslError::Syntax { line: p.line, col: p.col, msg: msg.into() }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Lexer<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn escape(&mut self, start: Pos) -> Result<char, DslError> {
        match self.bump() {
            Some('\\') => Ok('\\'),
            Some('"') => Ok('"'),
            Some('n') => Ok('\n'),
            Some('t') => Ok('\t'),
            Some(']') => Ok(']'),
            Some('-') => Ok('-'),
            Some('u') => {
                let mut code = 0u32;
                for _ in 0..4 {
                    let d = self.bump().and_then(|c| c.to_digit(16)).ok_or_else(|| syntax(start, "bad \\u escape"))?;
                    code = code * 16 + d;
                }
                char::from_u32(code).ok_or_else(|| syntax(start, "\\u escape is not a character"))
            }
            _ => Err(syntax(start, "unknown escape")),
        }
    }

    fn string(&mut self, start: Pos) -> Result<Tok, DslError> {
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(syntax(start, "unterminated string")),
                Some('"') => return Ok(Tok::Str(out)),
                Some('\\') => out.push(self.escape(start)?),
                Some(c) => out.push(c),
            }
        }
    }

    fn class(&mut self, start: Pos) -> Result<Tok, DslError> {
        let mut items = Vec::new();
        loop {
            let c = match self.bump() {
                None => return Err(syntax(start, "unterminated character class")),
                Some(']') => break,
                Some('\\') => self.escape(start)?,
                Some(c) => c,
            };
            if self.chars.peek() == Some(&'-') {
                self.bump();
                let hi = match self.bump() {
                    Some('\\') => self.escape(start)?,
                    Some(']') | None => return Err(syntax(start, "unfinished range in character class")),
                    Some(c) => c,
                };
                if hi < c {
                    return Err(syntax(start, format!("empty range {c}-{hi}")));
                }
                items.extend(c..=hi);
            } else {
                items.push(c);
            }
        }
        if items.is_empty() {
            return Err(syntax(start, "empty character class"));
        }
        let mut seen = std::collections::HashSet::new();
        items.retain(|c| seen.insert(*c));
        Ok(Tok::Class(items))
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>, DslError> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '#' {
                    while self.chars.peek().is_some_and(|&c| c != '\n') {
                        self.bump();
                    }
                } else {
                    break;
                }
            }
            let start = self.pos;
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, start));
                return Ok(out);
            };
            let tok = match c {
                '"' => self.string(start)?,
                '[' => self.class(start)?,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut name = c.to_string();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            name.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    match KEYWORDS.iter().find(|k| **k == name) {
                        Some(k) => Tok::Kw(k),
                        None => Tok::Ident(name),
                    }
                }
                ':' if self.chars.peek() == Some(&'=') => {
                    self.bump();
                    Tok::Sym(":=")
                }
                '<' => {
                    if self.bump() == Some('-') && self.bump() == Some('>') {
                        Tok::Sym("<->")
                    } else {
                        return Err(syntax(start, "expected `<->`"));
                    }
                }
                '|' => Tok::Sym("|"),
                '.' => Tok::Sym("."),
                '*' => Tok::Sym("*"),
                '(' => Tok::Sym("("),
                ')' => Tok::Sym(")"),
                ':' => Tok::Sym(":"),
                '=' => Tok::Sym("="),
                ';' => Tok::Sym(";"),
                '~' => Tok::Sym("~"),
                ',' => Tok::Sym(","),
                other => return Err(syntax(start, format!("unexpected character {other:?}"))),
            };
            out.push((tok, start));
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    Lexer { chars: text.chars().peekable(), pos: Pos { line: 1, col: 1 } }.tokens()
}

/// A named definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Regex(Mre),
    Lens(Lens),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Regex(_) => "regex",
            Value::Lens(_) => "lens",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub value: Value,
    pub is_main: bool,
    pub line: usize,
}

/// A parsed source file. Each definition has every earlier name it mentions
/// already inlined.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceFile {
    pub defs: Vec<Definition>,
}

impl SourceFile {
    pub fn get(&self, name: &str) -> Option<&Definition> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn main(&self) -> Option<&Definition> {
        self.defs.iter().find(|d| d.is_main)
    }

    pub fn regex(&self, name: &str) -> Option<&Mre> {
        match &self.get(name)?.value {
            Value::Regex(r) => Some(r),
            Value::Lens(_) => None,
        }
    }

    pub fn lens(&self, name: &str) -> Option<&Lens> {
        match &self.get(name)?.value {
            Value::Lens(l) => Some(l),
            Value::Regex(_) => None,
        }
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    named: &'a HashMap<String, Value>,
    /// Name of the definition being parsed, which may not refer to itself.
    current: Option<String>,
    binders: Vec<String>,
    links: Vec<String>,
    in_file: bool,
}

impl<'a> Parser<'a> {
    fn new(toks: Vec<(Tok, Pos)>, named: &'a HashMap<String, Value>) -> Self {
        Parser { toks, i: 0, named, current: None, binders: Vec::new(), links: Vec::new(), in_file: false }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, sym: &str) -> bool {
        match self.peek() {
            Tok::Sym(s) | Tok::Kw(s) if *s == sym => {
                self.advance();
                true
            }
            _ => false,
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), DslError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected `{sym}`, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            other => Err(syntax(self.pos(), format!("expected a name, found {other}"))),
        }
    }

    fn string(&mut self) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                Ok(s)
            }
            other => Err(syntax(self.pos(), format!("expected a string, found {other}"))),
        }
    }

    /// Looks up a name that is not bound locally.
    fn named(&self, name: &str, pos: Pos) -> Result<Option<&'a Value>, DslError> {
        if self.current.as_deref() == Some(name) {
            return Err(DslError::Recursive { line: pos.line, col: pos.col, name: name.into() });
        }
        Ok(self.named.get(name))
    }

    fn regex(&mut self) -> Result<Mre, DslError> {
        if self.eat("bind") {
            let x = self.ident()?;
            self.expect(":")?;
            let def = self.regex()?;
            self.expect("in")?;
            self.binders.push(x.clone());
            let body = self.regex();
            self.binders.pop();
            return Ok(Mre::bind(x, def, body?));
        }
        let mut left = self.regex_cat()?;
        while self.eat("|") {
            left = Mre::alt(left, self.regex_cat()?);
        }
        Ok(left)
    }

    fn regex_cat(&mut self) -> Result<Mre, DslError> {
        let mut left = self.regex_post()?;
        while self.eat(".") {
            left = Mre::concat(left, self.regex_post()?);
        }
        Ok(left)
    }

    fn regex_post(&mut self) -> Result<Mre, DslError> {
        let mut r = self.regex_atom()?;
        while self.eat("*") {
            r = Mre::star(r);
        }
        Ok(r)
    }

    fn regex_atom(&mut self) -> Result<Mre, DslError> {
        let pos = self.pos();
        match self.advance() {
            Tok::Str(s) => Ok(Mre::lit(&s)),
            Tok::Class(cs) => Ok(Mre::class(cs)),
            Tok::Kw("eps") => Ok(Mre::Epsilon),
            Tok::Sym("(") => {
                let r = self.regex()?;
                self.expect(")")?;
                Ok(r)
            }
            Tok::Ident(name) => {
                if self.binders.contains(&name) {
                    return Ok(Mre::Var(name));
                }
                match self.named(&name, pos)? {
                    Some(Value::Regex(r)) => Ok(r.clone()),
                    Some(other) => Err(DslError::WrongKind {
                        line: pos.line,
                        col: pos.col,
                        name,
                        found: other.kind(),
                        expected: "regex",
                    }),
                    None => Ok(Mre::Var(name)),
                }
            }
            other => Err(syntax(pos, format!("expected an expression, found {other}"))),
        }
    }

    /// In a file, `;` ends a definition when the next definition or the end
    /// of input follows it.
    fn ends_definition(&self) -> bool {
        self.in_file
            && matches!(self.peek(), Tok::Sym(";"))
            && match self.peek_at(1) {
                Tok::Eof | Tok::Kw("main") => true,
                Tok::Ident(_) => *self.peek_at(2) == Tok::Sym(":="),
                _ => false,
            }
    }

    fn lens(&mut self) -> Result<Lens, DslError> {
        if self.eat("link") {
            let y = self.ident()?;
            self.expect("=")?;
            let def = self.lens()?;
            self.expect("in")?;
            self.links.push(y.clone());
            let body = self.lens();
            self.links.pop();
            return Ok(Lens::link(y, def, body?));
        }
        let mut left = self.lens_or()?;
        while !self.ends_definition() && self.eat(";") {
            left = Lens::comp(left, self.lens_or()?);
        }
        Ok(left)
    }

    fn lens_or(&mut self) -> Result<Lens, DslError> {
        let mut left = self.lens_cat()?;
        while self.eat("|") {
            left = Lens::or(left, self.lens_cat()?);
        }
        Ok(left)
    }

    fn lens_cat(&mut self) -> Result<Lens, DslError> {
        let mut left = self.lens_post()?;
        loop {
            if self.eat(".") {
                left = Lens::concat(left, self.lens_post()?);
            } else if self.eat("~") {
                left = Lens::swap(left, self.lens_post()?);
            } else {
                return Ok(left);
            }
        }
    }

    fn lens_post(&mut self) -> Result<Lens, DslError> {
        let mut l = self.lens_atom()?;
        while self.eat("*") {
            l = Lens::iter(l);
        }
        Ok(l)
    }

    fn lens_atom(&mut self) -> Result<Lens, DslError> {
        let pos = self.pos();
        match self.advance() {
            Tok::Kw("const") => {
                self.expect("(")?;
                let a = self.string()?;
                self.expect(",")?;
                let b = self.string()?;
                self.expect(")")?;
                Ok(Lens::constant(a, b))
            }
            Tok::Str(a) => {
                self.expect("<->")?;
                Ok(Lens::constant(a, self.string()?))
            }
            Tok::Kw("id") => {
                self.expect("(")?;
                let saved = std::mem::take(&mut self.binders);
                let r = self.regex();
                self.binders = saved;
                let r = r?;
                self.expect(")")?;
                Ok(Lens::id(r))
            }
            Tok::Sym("(") => {
                let l = self.lens()?;
                self.expect(")")?;
                Ok(l)
            }
            Tok::Ident(name) => {
                if self.links.contains(&name) {
                    return Ok(Lens::Var(name));
                }
                match self.named(&name, pos)? {
                    Some(Value::Lens(l)) => Ok(l.clone()),
                    Some(other) => Err(DslError::WrongKind {
                        line: pos.line,
                        col: pos.col,
                        name,
                        found: other.kind(),
                        expected: "lens",
                    }),
                    None => Ok(Lens::Var(name)),
                }
            }
            other => Err(syntax(pos, format!("expected a lens, found {other}"))),
        }
    }

    fn end(&self) -> Result<(), DslError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            other => Err(syntax(self.pos(), format!("unexpected {other}"))),
        }
    }
}

/// Parses a standalone expression. Every name is a variable.
pub fn parse_regex(text: &str) -> Result<Mre, DslError> {
    let named = HashMap::new();
    let mut p = Parser::new(lex(text)?, &named);
    let r = p.regex()?;
    p.end()?;
    Ok(r)
}

/// Parses a standalone lens. Every name is a lens variable.
pub fn parse_lens(text: &str) -> Result<Lens, DslError> {
    let named = HashMap::new();
    let mut p = Parser::new(lex(text)?, &named);
    let l = p.lens()?;
    p.end()?;
    Ok(l)
}

/// Parses a file of definitions. A definition is read as an expression if
/// it parses as one, otherwise as a lens.
pub fn parse_file(text: &str) -> Result<SourceFile, DslError> {
    let toks = lex(text)?;
    let mut named: HashMap<String, Value> = HashMap::new();
    let mut file = SourceFile::default();
    let mut i = 0;
    loop {
        let mut p = Parser::new(toks.clone(), &named);
        p.in_file = true;
        p.i = i;
        if *p.peek() == Tok::Eof {
            return Ok(file);
        }
        let start = p.pos();
        let is_main = p.eat("main");
        if is_main && file.main().is_some() {
            return Err(DslError::SecondMain { line: start.line, col: start.col });
        }
        let name_pos = p.pos();
        let name = p.ident()?;
        if named.contains_key(&name) {
            return Err(DslError::Duplicate { line: name_pos.line, col: name_pos.col, name });
        }
        p.expect(":=")?;
        p.current = Some(name.clone());
        let body_start = p.i;
        let as_regex = p.regex().and_then(|r| if p.ends_definition() { Ok(r) } else { Err(syntax(p.pos(), "")) });
        let value = match as_regex {
            Ok(r) => Value::Regex(r),
            Err(regex_err) => {
                p.i = body_start;
                p.binders.clear();
                match p.lens() {
                    Ok(l) if p.ends_definition() => Value::Lens(l),
                    Ok(_) => return Err(syntax(p.pos(), format!("expected `;`, found {}", p.peek()))),
                    Err(lens_err) => {
                        // Report whichever reading got further.
                        let real = !matches!(&regex_err, DslError::Syntax { msg, .. } if msg.is_empty());
                        return Err(if real && regex_err.position() > lens_err.position() { regex_err } else { lens_err });
                    }
                }
            }
        };
        p.expect(";")?;
        i = p.i;
        named.insert(name.clone(), value.clone());
        file.defs.push(Definition { name, value, is_main, line: start.line });
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() && (c as u32) <= 0xFFFF => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// The literal an expression prints as, if it is exactly the shape a string
/// literal parses to.
fn literal_form(r: &Mre) -> Option<String> {
    let s = r.as_literal()?;
    (Mre::lit(&s) == *r).then_some(s)
}

fn wrap(s: String, parens: bool) -> String {
    if parens {
        format!("({s})")
    } else {
        s
    }
}

/// Precedence levels: 0 alternation, 1 concatenation, 2 postfix. `tail`
/// means nothing follows at this level, so a `bind` may stay bare.
fn regex_prec(r: &Mre, prec: u8, tail: bool) -> String {
    if let Some(s) = literal_form(r) {
        return if s.is_empty() { "eps".into() } else { quote(&s) };
    }
    match r {
        Mre::Epsilon => "eps".into(),
        Mre::Const(c) => quote(&c.to_string()),
        Mre::Var(x) => x.clone(),
        Mre::Star(inner) => format!("{}*", regex_prec(inner, 2, false)),
        Mre::Alt(l, rr) => {
            let parens = prec > 0;
            let tail = tail || parens;
            wrap(format!("{} | {}", regex_prec(l, 0, false), regex_prec(rr, 1, tail)), parens)
        }
        Mre::Concat(l, rr) => {
            let parens = prec > 1;
            let tail = tail || parens;
            wrap(format!("{} . {}", regex_prec(l, 1, false), regex_prec(rr, 2, tail)), parens)
        }
        Mre::Bind(x, d, b) => {
            let parens = prec > 0 || !tail;
            wrap(format!("bind {x} : {} in {}", regex_prec(d, 0, false), regex_prec(b, 0, true)), parens)
        }
    }
}

pub fn print_regex(r: &Mre) -> String {
    regex_prec(r, 0, true)
}

/// Precedence levels: 0 composition, 1 alternation, 2 concatenation and
/// swap, 3 right operand of those, 4 operand of `*`.
fn lens_prec(l: &Lens, prec: u8, tail: bool) -> String {
    match l {
        Lens::Const(a, b) => {
            let s = format!("{} <-> {}", quote(a), quote(b));
            // A trailing `*` would otherwise look like it belongs to the
            // right-hand string.
            wrap(s, prec > 3)
        }
        Lens::Id(r) => format!("id({})", print_regex(r)),
        Lens::Var(y) => y.clone(),
        Lens::Iter(inner) => format!("{}*", lens_prec(inner, 4, false)),
        Lens::Comp(a, b) => {
            let parens = prec > 0;
            let tail = tail || parens;
            wrap(format!("{} ; {}", lens_prec(a, 0, false), lens_prec(b, 1, tail)), parens)
        }
        Lens::Or(a, b) => {
            let parens = prec > 1;
            let tail = tail || parens;
            wrap(format!("{} | {}", lens_prec(a, 1, false), lens_prec(b, 2, tail)), parens)
        }
        Lens::Concat(a, b) | Lens::Swap(a, b) => {
            let op = if matches!(l, Lens::Concat(..)) { "." } else { "~" };
            let parens = prec > 2;
            let tail = tail || parens;
            wrap(format!("{} {op} {}", lens_prec(a, 2, false), lens_prec(b, 3, tail)), parens)
        }
        Lens::Link(y, d, b) => {
            let parens = prec > 0 || !tail;
            wrap(format!("link {y} = {} in {}", lens_prec(d, 0, false), lens_prec(b, 0, true)), parens)
        }
    }
}

pub fn print_lens(l: &Lens) -> String {
    lens_prec(l, 0, true)
}
