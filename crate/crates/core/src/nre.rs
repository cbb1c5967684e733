//! Nominal regular expressions: syntax, concrete grammar and static analyses.
//!
//! Concrete grammar:
//!
//! ```text
//! e ::= 1 | 0 | s | $n | _$n | e + e | e e | e* | (e) | <$n. e> | <$n. e>$m
//! ```
//!
//! `*` binds tightest, then juxtaposition (left associative), then `+`.
//! A close name must follow `>` without intervening whitespace; `>$n` right
//! after a `<$n.` binder is the plain binder followed by an occurrence of `n`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::nominal::{Letter, Name, Perm};

/// Abstract syntax tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Nre {
    One,
    Zero,
    Letter(Letter),
    Name(Name),
    Under(Name),
    Sum(Box<Nre>, Box<Nre>),
    Concat(Box<Nre>, Box<Nre>),
    Star(Box<Nre>),
    /// `⟨bind body⟩^close`; `close == bind` is the plain binder.
    Binder {
        bind: Name,
        body: Box<Nre>,
        close: Name,
    },
}

impl Nre {
    pub fn letter(s: &str) -> Nre {
        Nre::Letter(Letter::new(s))
    }

    pub fn name(s: &str) -> Nre {
        Nre::Name(Name::user(s))
    }

    pub fn under(s: &str) -> Nre {
        Nre::Under(Name::user(s))
    }

    pub fn sum(l: Nre, r: Nre) -> Nre {
        Nre::Sum(Box::new(l), Box::new(r))
    }

    pub fn concat(l: Nre, r: Nre) -> Nre {
        Nre::Concat(Box::new(l), Box::new(r))
    }

    pub fn star(e: Nre) -> Nre {
        Nre::Star(Box::new(e))
    }

    pub fn binder(bind: Name, body: Nre, close: Name) -> Nre {
        Nre::Binder {
            bind,
            body: Box::new(body),
            close,
        }
    }

    /// The plain binder `⟨n e⟩`.
    pub fn bind(n: Name, body: Nre) -> Nre {
        Nre::binder(n.clone(), body, n)
    }

    /// Every name mentioned anywhere, including binder and close names.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Nre::One | Nre::Zero | Nre::Letter(_) => {}
            Nre::Name(n) | Nre::Under(n) => {
                out.insert(n.clone());
            }
            Nre::Sum(l, r) | Nre::Concat(l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
            Nre::Star(e) => e.collect_names(out),
            Nre::Binder { bind, body, close } => {
                out.insert(bind.clone());
                out.insert(close.clone());
                body.collect_names(out);
            }
        }
    }

    pub fn letters(&self) -> BTreeSet<Letter> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Nre::Letter(l) = e {
                out.insert(l.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Nre)) {
        f(self);
        match self {
            Nre::Sum(l, r) | Nre::Concat(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Nre::Star(e) | Nre::Binder { body: e, .. } => e.visit(f),
            _ => {}
        }
    }

    /// Maximum nesting depth of binders.
    pub fn binder_depth(&self) -> usize {
        match self {
            Nre::One | Nre::Zero | Nre::Letter(_) | Nre::Name(_) | Nre::Under(_) => 0,
            Nre::Sum(l, r) | Nre::Concat(l, r) => l.binder_depth().max(r.binder_depth()),
            Nre::Star(e) => e.binder_depth(),
            Nre::Binder { body, .. } => 1 + body.binder_depth(),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

impl fmt::Display for Nre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

/// The declared finite alphabet used while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alphabet {
    /// Explicit letters; identifiers are split by longest match.
    Declared(BTreeSet<Letter>),
    /// Every ASCII alphabetic character is a letter on its own.
    SingleChars,
}

impl Alphabet {
    pub fn declared<'a>(letters: impl IntoIterator<Item = &'a str>) -> Alphabet {
        Alphabet::Declared(letters.into_iter().map(Letter::new).collect())
    }

    fn longest_prefix(&self, s: &str) -> Option<usize> {
        match self {
            Alphabet::SingleChars => s
                .chars()
                .next()
                .filter(|c| c.is_ascii_alphabetic())
                .map(|c| c.len_utf8()),
            Alphabet::Declared(set) => set
                .iter()
                .filter(|l| s.starts_with(l.as_str()))
                .map(|l| l.as_str().len())
                .max(),
        }
    }
}

/// What went wrong while parsing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    Lexical(char),
    #[error("`{0}` is not a letter of the alphabet")]
    UnknownLetter(String),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unexpected end of input, expected {0}")]
    UnexpectedEnd(String),
}

/// A parse error tagged with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    One,
    Zero,
    Letter(String),
    Name(String),
    Under(String),
    LAngle,
    Dot,
    RAngle,
    Plus,
    Star,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::One => write!(f, "`1`"),
            Tok::Zero => write!(f, "`0`"),
            Tok::Letter(s) => write!(f, "letter `{s}`"),
            Tok::Name(s) => write!(f, "name `${s}`"),
            Tok::Under(s) => write!(f, "`_${s}`"),
            Tok::LAngle => write!(f, "`<`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::RAngle => write!(f, "`>`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Star => write!(f, "`*`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
    /// No whitespace between this token and the previous one.
    glued: bool,
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str, alphabet: &Alphabet) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks: Vec<Spanned> = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    let mut glued = false;
    let ident_run = |start: usize| -> String { chars[start..].iter().take_while(|c| is_ident(**c)).collect() };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
            glued = false;
            continue;
        }
        let mut emitted: Vec<(Tok, usize)> = Vec::new();
        match c {
            '<' => emitted.push((Tok::LAngle, 1)),
            '>' => emitted.push((Tok::RAngle, 1)),
            '.' => emitted.push((Tok::Dot, 1)),
            '+' => emitted.push((Tok::Plus, 1)),
            '*' => emitted.push((Tok::Star, 1)),
            '(' => emitted.push((Tok::LParen, 1)),
            ')' => emitted.push((Tok::RParen, 1)),
            '$' => {
                let id = ident_run(i + 1);
                if id.is_empty() {
                    return Err(ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::Lexical('$'),
                    });
                }
                let w = 1 + id.chars().count();
                emitted.push((Tok::Name(id), w));
            }
            '_' if chars.get(i + 1) == Some(&'$') => {
                let id = ident_run(i + 2);
                if id.is_empty() {
                    return Err(ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::Lexical('$'),
                    });
                }
                let w = 2 + id.chars().count();
                emitted.push((Tok::Under(id), w));
            }
            c if is_ident(c) => {
                let run = ident_run(i);
                let mut rest: &str = &run;
                let mut offset = 0;
                while !rest.is_empty() {
                    if let Some(len) = alphabet.longest_prefix(rest) {
                        let w = rest[..len].chars().count();
                        emitted.push((Tok::Letter(rest[..len].to_string()), w));
                        rest = &rest[len..];
                        offset += w;
                    } else if rest.starts_with('1') || rest.starts_with('0') {
                        let t = if rest.starts_with('1') { Tok::One } else { Tok::Zero };
                        emitted.push((t, 1));
                        rest = &rest[1..];
                        offset += 1;
                    } else {
                        return Err(ParseError {
                            line,
                            col: col + offset,
                            kind: ParseErrorKind::UnknownLetter(rest.to_string()),
                        });
                    }
                }
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    kind: ParseErrorKind::Lexical(other),
                })
            }
        }
        for (tok, w) in emitted {
            toks.push(Spanned { tok, line, col, glued });
            i += w;
            col += w;
            glued = true;
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn error_here(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError {
                line: t.line,
                col: t.col,
                kind: ParseErrorKind::Unexpected {
                    expected: expected.to_string(),
                    found: t.tok.to_string(),
                },
            },
            None => ParseError {
                line: self.end.0,
                col: self.end.1,
                kind: ParseErrorKind::UnexpectedEnd(expected.to_string()),
            },
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().map(|t| &t.tok) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(what))
        }
    }

    fn sum(&mut self) -> Result<Nre, ParseError> {
        let mut e = self.concat()?;
        while self.peek().map(|t| &t.tok) == Some(&Tok::Plus) {
            self.pos += 1;
            let r = self.concat()?;
            e = Nre::sum(e, r);
        }
        Ok(e)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek().map(|t| &t.tok),
            Some(Tok::One | Tok::Zero | Tok::Letter(_) | Tok::Name(_) | Tok::Under(_) | Tok::LParen | Tok::LAngle)
        )
    }

    fn concat(&mut self) -> Result<Nre, ParseError> {
        if !self.starts_atom() {
            return Err(self.error_here("an expression"));
        }
        let mut e = self.postfix()?;
        while self.starts_atom() {
            let r = self.postfix()?;
            e = Nre::concat(e, r);
        }
        Ok(e)
    }

    fn postfix(&mut self) -> Result<Nre, ParseError> {
        let mut e = self.atom()?;
        while self.peek().map(|t| &t.tok) == Some(&Tok::Star) {
            self.pos += 1;
            e = Nre::star(e);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Nre, ParseError> {
        let t = self.peek().cloned().ok_or_else(|| self.error_here("an expression"))?;
        self.pos += 1;
        Ok(match t.tok {
            Tok::One => Nre::One,
            Tok::Zero => Nre::Zero,
            Tok::Letter(s) => Nre::letter(&s),
            Tok::Name(s) => Nre::name(&s),
            Tok::Under(s) => Nre::under(&s),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                e
            }
            Tok::LAngle => {
                let bind = match self.peek().map(|t| t.tok.clone()) {
                    Some(Tok::Name(s)) => {
                        self.pos += 1;
                        Name::user(&s)
                    }
                    _ => return Err(self.error_here("a binder name `$n`")),
                };
                self.expect(Tok::Dot, "`.`")?;
                let body = self.sum()?;
                self.expect(Tok::RAngle, "`>`")?;
                let close = match self.peek() {
                    Some(Spanned {
                        tok: Tok::Name(m),
                        glued: true,
                        ..
                    }) if Name::user(m) != bind => {
                        let m = Name::user(m);
                        self.pos += 1;
                        m
                    }
                    _ => bind.clone(),
                };
                Nre::binder(bind, body, close)
            }
            _ => {
                self.pos -= 1;
                return Err(self.error_here("an expression"));
            }
        })
    }
}

/// Parses the concrete syntax.
pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Nre, ParseError> {
    let toks = lex(text, alphabet)?;
    let line = text.lines().count().max(1);
    let col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    let mut p = Parser {
        toks,
        pos: 0,
        end: (line, col),
    };
    let e = p.sum()?;
    if p.peek().is_some() {
        return Err(p.error_here("end of input"));
    }
    Ok(e)
}

fn render_name(n: &Name) -> String {
    format!("${n}")
}

const PREC_SUM: u8 = 0;
const PREC_CAT: u8 = 1;
const PREC_STAR: u8 = 2;

fn render_at(e: &Nre, prec: u8) -> String {
    let (s, own) = match e {
        Nre::One => ("1".to_string(), PREC_STAR),
        Nre::Zero => ("0".to_string(), PREC_STAR),
        Nre::Letter(l) => (l.to_string(), PREC_STAR),
        Nre::Name(n) => (render_name(n), PREC_STAR),
        Nre::Under(n) => (format!("_{}", render_name(n)), PREC_STAR),
        Nre::Sum(l, r) => (
            format!("{}+{}", render_at(l, PREC_SUM), render_at(r, PREC_CAT)),
            PREC_SUM,
        ),
        Nre::Concat(l, r) => {
            let (a, b) = (render_at(l, PREC_CAT), render_at(r, PREC_STAR));
            let gap = match (a.chars().last(), b.chars().next()) {
                (Some(x), Some(y)) if is_ident(x) && is_ident(y) => " ",
                (Some('>'), Some('$')) => " ",
                _ => "",
            };
            (format!("{a}{gap}{b}"), PREC_CAT)
        }
        Nre::Star(inner) => {
            let s = match **inner {
                Nre::Sum(..) | Nre::Concat(..) => format!("({})*", render_at(inner, PREC_SUM)),
                _ => format!("{}*", render_at(inner, PREC_STAR)),
            };
            (s, PREC_STAR)
        }
        Nre::Binder { bind, body, close } => {
            let mut s = format!("<{}.{}>", render_name(bind), render_at(body, PREC_SUM));
            if close != bind {
                s.push_str(&render_name(close));
            }
            (s, PREC_STAR)
        }
    };
    if own < prec {
        format!("({s})")
    } else {
        s
    }
}

/// Renders in the concrete syntax; [`parse`] inverts it.
pub fn render(e: &Nre) -> String {
    render_at(e, PREC_SUM)
}

/// The four expression classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NreClass {
    B,
    P,
    U,
    UP,
}

impl NreClass {
    /// Inclusion order: `B ≤ P, U ≤ UP`.
    pub fn leq(self, other: NreClass) -> bool {
        self == other || self == NreClass::B || other == NreClass::UP
    }
}

impl fmt::Display for NreClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NreClass::B => "b-NRE",
            NreClass::P => "p-NRE",
            NreClass::U => "u-NRE",
            NreClass::UP => "up-NRE",
        })
    }
}

/// The least class containing `e`.
pub fn classify(e: &Nre) -> NreClass {
    let (mut under, mut perm) = (false, false);
    e.visit(&mut |x| match x {
        Nre::Under(_) => under = true,
        Nre::Binder { bind, close, .. } if bind != close => perm = true,
        _ => {}
    });
    match (under, perm) {
        (false, false) => NreClass::B,
        (false, true) => NreClass::P,
        (true, false) => NreClass::U,
        (true, true) => NreClass::UP,
    }
}

/// Free names; the close name of `⟨n e⟩^m` with `m ≠ n` is a use of `m`.
pub fn free_names(e: &Nre) -> BTreeSet<Name> {
    match e {
        Nre::One | Nre::Zero | Nre::Letter(_) => BTreeSet::new(),
        Nre::Name(n) | Nre::Under(n) => [n.clone()].into_iter().collect(),
        Nre::Sum(l, r) | Nre::Concat(l, r) => {
            let mut s = free_names(l);
            s.extend(free_names(r));
            s
        }
        Nre::Star(e) => free_names(e),
        Nre::Binder { bind, body, close } => {
            let mut s = free_names(body);
            s.remove(bind);
            if close != bind {
                s.insert(close.clone());
            }
            s
        }
    }
}

/// One finding of [`check_wellformed`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// `⟨n e⟩^m` with `m ≠ n` outside every binder of `m`.
    Scope { subterm: String, close: Name },
    /// `_$n` outside every binder of `n`.
    UnderlineNotLocal { name: Name },
    /// The expression has free names.
    NotClosed { names: Vec<Name> },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Scope { subterm, close } => write!(
                f,
                "scope violation: `{subterm}` closes on `${close}`, which no enclosing binder introduces"
            ),
            Diagnostic::UnderlineNotLocal { name } => write!(
                f,
                "underline locality violation: `_${name}` is not inside a binder of `${name}`"
            ),
            Diagnostic::NotClosed { names } => {
                let ns: Vec<String> = names.iter().map(|n| format!("${n}")).collect();
                write!(f, "expression is not closed: free names {}", ns.join(", "))
            }
        }
    }
}

/// Diagnostics collected by [`check_wellformed`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WellFormedReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl WellFormedReport {
    /// Scope, locality and closedness all hold.
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// Scope and locality hold; free names are tolerated.
    pub fn is_ok_open(&self) -> bool {
        self.diagnostics
            .iter()
            .all(|d| matches!(d, Diagnostic::NotClosed { .. }))
    }
}

/// Checks the scope condition, underline locality and closedness.
pub fn check_wellformed(e: &Nre) -> WellFormedReport {
    check_wellformed_in(e, &[])
}

/// Like [`check_wellformed`], treating `ctx` as names bound by enclosing
/// binders.
pub fn check_wellformed_in(e: &Nre, ctx: &[Name]) -> WellFormedReport {
    fn go(e: &Nre, bound: &mut Vec<Name>, out: &mut Vec<Diagnostic>) {
        match e {
            Nre::One | Nre::Zero | Nre::Letter(_) | Nre::Name(_) => {}
            Nre::Under(n) => {
                if !bound.contains(n) {
                    out.push(Diagnostic::UnderlineNotLocal { name: n.clone() });
                }
            }
            Nre::Sum(l, r) | Nre::Concat(l, r) => {
                go(l, bound, out);
                go(r, bound, out);
            }
            Nre::Star(e) => go(e, bound, out),
            Nre::Binder { bind, body, close } => {
                if close != bind && !bound.contains(close) {
                    out.push(Diagnostic::Scope {
                        subterm: render(e),
                        close: close.clone(),
                    });
                }
                bound.push(bind.clone());
                go(body, bound, out);
                bound.pop();
            }
        }
    }
    let mut diagnostics = Vec::new();
    go(e, &mut ctx.to_vec(), &mut diagnostics);
    let free: Vec<Name> = free_names(e).into_iter().filter(|n| !ctx.contains(n)).collect();
    if !free.is_empty() {
        diagnostics.push(Diagnostic::NotClosed { names: free });
    }
    WellFormedReport { diagnostics }
}

/// The permutation action on expressions.
pub fn apply_perm_expr(p: &Perm, e: &Nre) -> Nre {
    match e {
        Nre::One | Nre::Zero | Nre::Letter(_) => e.clone(),
        Nre::Name(n) => Nre::Name(p.apply(n)),
        Nre::Under(n) => Nre::Under(p.apply(n)),
        Nre::Sum(l, r) => Nre::sum(apply_perm_expr(p, l), apply_perm_expr(p, r)),
        Nre::Concat(l, r) => Nre::concat(apply_perm_expr(p, l), apply_perm_expr(p, r)),
        Nre::Star(e) => Nre::star(apply_perm_expr(p, e)),
        Nre::Binder { bind, body, close } => Nre::binder(p.apply(bind), apply_perm_expr(p, body), p.apply(close)),
    }
}

/// Equality up to renaming of bound names. The close name of a binder is
/// resolved in the scope enclosing that binder.
pub fn alpha_eq(e1: &Nre, e2: &Nre) -> bool {
    fn same(x: &Name, y: &Name, env1: &[Name], env2: &[Name]) -> bool {
        match (env1.iter().rposition(|n| n == x), env2.iter().rposition(|n| n == y)) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        }
    }
    fn go(a: &Nre, b: &Nre, env1: &mut Vec<Name>, env2: &mut Vec<Name>) -> bool {
        match (a, b) {
            (Nre::One, Nre::One) | (Nre::Zero, Nre::Zero) => true,
            (Nre::Letter(x), Nre::Letter(y)) => x == y,
            (Nre::Name(x), Nre::Name(y)) | (Nre::Under(x), Nre::Under(y)) => same(x, y, env1, env2),
            (Nre::Sum(l1, r1), Nre::Sum(l2, r2)) | (Nre::Concat(l1, r1), Nre::Concat(l2, r2)) => {
                go(l1, l2, env1, env2) && go(r1, r2, env1, env2)
            }
            (Nre::Star(x), Nre::Star(y)) => go(x, y, env1, env2),
            (
                Nre::Binder {
                    bind: n1,
                    body: b1,
                    close: m1,
                },
                Nre::Binder {
                    bind: n2,
                    body: b2,
                    close: m2,
                },
            ) => {
                let plain1 = n1 == m1;
                if plain1 != (n2 == m2) {
                    return false;
                }
                if !plain1 && !same(m1, m2, env1, env2) {
                    return false;
                }
                env1.push(n1.clone());
                env2.push(n2.clone());
                let r = go(b1, b2, env1, env2);
                env1.pop();
                env2.pop();
                r
            }
            _ => false,
        }
    }
    go(e1, e2, &mut Vec::new(), &mut Vec::new())
}

/// Returns `h` when `e` is `⟨n₁ … ⟨n_h f⟩ … ⟩` with `f` in the first-degree
/// fragment: its only binders are `⟨n ($n)⟩^{n_i}` for one extra name `n`
/// and `i ≤ h`, and its names are among `n₁ … n_h, n`.
pub fn classify_first_degree(e: &Nre) -> Option<usize> {
    let mut prefix: Vec<Name> = Vec::new();
    let mut cur = e;
    while let Nre::Binder { bind, body, close } = cur {
        if bind != close || prefix.contains(bind) {
            break;
        }
        prefix.push(bind.clone());
        cur = body;
    }
    let mut extra: Option<Name> = None;
    fn fne(e: &Nre, prefix: &[Name], extra: &mut Option<Name>) -> bool {
        let allowed = |n: &Name, extra: &mut Option<Name>| {
            if prefix.contains(n) {
                return true;
            }
            match extra {
                Some(x) => x == n,
                None => {
                    *extra = Some(n.clone());
                    true
                }
            }
        };
        match e {
            Nre::One | Nre::Zero | Nre::Letter(_) => true,
            Nre::Name(n) | Nre::Under(n) => allowed(n, extra),
            Nre::Sum(l, r) | Nre::Concat(l, r) => fne(l, prefix, extra) && fne(r, prefix, extra),
            Nre::Star(x) => fne(x, prefix, extra),
            Nre::Binder { bind, body, close } => {
                !prefix.contains(bind)
                    && allowed(bind, extra)
                    && **body == Nre::Name(bind.clone())
                    && prefix.contains(close)
            }
        }
    }
    fne(cur, &prefix, &mut extra).then_some(prefix.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Nre {
        parse(s, &Alphabet::SingleChars).unwrap()
    }

    fn n(s: &str) -> Name {
        Name::user(s)
    }

    #[test]
    fn parses_lses() {
        let e = parse("ab<$n._$n*>", &Alphabet::declared(["a", "b"])).unwrap();
        let expected = Nre::concat(
            Nre::concat(Nre::letter("a"), Nre::letter("b")),
            Nre::bind(n("n"), Nre::star(Nre::under("n"))),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn parses_constants_and_successive() {
        assert_eq!(p("1"), Nre::One);
        let e = p("<$m.(<$n.$n>$m)*>");
        let expected = Nre::bind(n("m"), Nre::star(Nre::binder(n("n"), Nre::name("n"), n("m"))));
        assert_eq!(e, expected);
    }

    #[test]
    fn close_equal_to_bind_is_a_following_name() {
        let e = p("$n<$n.$n>$n");
        let expected = Nre::concat(
            Nre::concat(Nre::name("n"), Nre::bind(n("n"), Nre::name("n"))),
            Nre::name("n"),
        );
        assert_eq!(e, expected);
        let e = p("<$n.$n> $m");
        assert_eq!(e, Nre::concat(Nre::bind(n("n"), Nre::name("n")), Nre::name("m")));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse("ab<$n.c>", &Alphabet::declared(["a", "b"])).unwrap_err();
        assert_eq!((err.line, err.col), (1, 7));
        assert!(matches!(err.kind, ParseErrorKind::UnknownLetter(_)));
        let err = parse("a\n  + )", &Alphabet::SingleChars).unwrap_err();
        assert_eq!((err.line, err.col), (2, 5));
        assert!(parse("<$n.$n", &Alphabet::SingleChars).is_err());
        assert!(parse("a # b", &Alphabet::SingleChars).is_err());
    }

    #[test]
    fn render_examples() {
        assert_eq!(render(&Nre::One), "1");
        assert_eq!(render(&Nre::bind(n("n"), Nre::name("n"))), "<$n.$n>");
        let e = p("ab<$n._$n*>");
        assert_eq!(parse(&render(&e), &Alphabet::SingleChars).unwrap(), e);
        let e = p("(a+b)(c+1)*<$n.$n>$m $m");
        assert_eq!(parse(&render(&e), &Alphabet::SingleChars).unwrap(), e);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&p("ab<$n._$n*>")), NreClass::U);
        assert_eq!(classify(&p("<$m.(<$n.$n>$m)*>")), NreClass::P);
        assert_eq!(classify(&p("<$n.$n>")), NreClass::B);
        assert_eq!(
            classify(&p("ab<$n.(_$n<$m.(<$l.($m+$l)*d>$m+<$l.($m+$l)*d>)*>)*>")),
            NreClass::UP
        );
    }

    #[test]
    fn wellformedness_examples() {
        let r = check_wellformed(&p("<$n.$n>$m"));
        assert!(r
            .diagnostics
            .iter()
            .any(|d| matches!(d, Diagnostic::Scope { close, .. } if *close == n("m"))));
        assert!(check_wellformed(&p("<$m.<$n.$n>$m>")).is_ok());
        let r = check_wellformed(&p("_$n"));
        assert!(r
            .diagnostics
            .iter()
            .any(|d| matches!(d, Diagnostic::UnderlineNotLocal { .. })));
        let r = check_wellformed(&p("$n"));
        assert!(!r.is_ok() && r.is_ok_open());
    }

    #[test]
    fn free_name_examples() {
        let s = |v: &[&str]| v.iter().map(|x| n(x)).collect::<BTreeSet<_>>();
        assert_eq!(free_names(&p("$n<$n.$n>$n")), s(&["n"]));
        assert_eq!(free_names(&p("<$n.$n>")), s(&[]));
        assert_eq!(free_names(&p("<$n.$n>$m")), s(&["m"]));
    }

    #[test]
    fn perm_action_examples() {
        let e = p("<$n.$n>");
        assert_eq!(apply_perm_expr(&Perm::identity(), &e), e);
        let t = crate::nominal::transpose(&n("n"), &n("m"));
        assert_eq!(apply_perm_expr(&t, &e), p("<$m.$m>"));
        assert_eq!(apply_perm_expr(&t, &p("a")), p("a"));
    }

    #[test]
    fn alpha_examples() {
        assert!(alpha_eq(&p("<$n.$n>"), &p("<$m.$m>")));
        assert!(!alpha_eq(&p("$n"), &p("$m")));
        assert!(alpha_eq(&p("<$a.<$b.$b>$a $a>"), &p("<$x.<$y.$y>$x $x>")));
        assert!(!alpha_eq(&p("<$a.<$b.$b>$a>"), &p("<$a.<$b.$b>>")));
        assert!(!alpha_eq(&p("<$a.<$b.$a>>"), &p("<$a.<$b.$b>>")));
    }

    #[test]
    fn first_degree_examples() {
        assert_eq!(classify_first_degree(&p("<$n1.<$n2.($n1+_$n2)*>>")), Some(2));
        assert_eq!(classify_first_degree(&p("<$n.<$m.$m<$l.$l>>>")), None);
        assert_eq!(classify_first_degree(&p("1")), Some(0));
        assert_eq!(classify_first_degree(&p("<$a.(<$b.$b>$a $a)*>")), Some(1));
    }

    #[test]
    fn binder_depth_counts_nesting() {
        assert_eq!(p("<$n.<$m.$m>$n <$l.$l>>").binder_depth(), 2);
    }
}
