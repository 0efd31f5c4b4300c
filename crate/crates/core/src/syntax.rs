//! Formulas of the basic modal language over indexed atoms `p0, p1, ...`.
//!
//! The abstract syntax has exactly five constructors; the connectives
//! `true`, `|`, `->`, `<->` and `<>` are eliminated by the parser and by the
//! smart constructors below, so every other module only ever matches on the
//! core forms.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

/// A modal formula in core syntax.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Bottom,
    Atom(u32),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
}

impl Formula {
    pub fn atom(index: u32) -> Self {
        Formula::Atom(index)
    }

    pub fn top() -> Self {
        Formula::Not(Box::new(Formula::Bottom))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn boxed(f: Formula) -> Self {
        Formula::Box(Box::new(f))
    }

    /// `a | b` as `~(~a & ~b)`.
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `a -> b` as `~(a & ~b)`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    /// `<> a` as `~[]~a`.
    pub fn diamond(f: Formula) -> Self {
        Formula::not(Formula::boxed(Formula::not(f)))
    }

    /// Conjunction of a list; the empty conjunction is `true`.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        let mut iter = items.into_iter();
        match iter.next() {
            None => Formula::top(),
            Some(first) => iter.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list; the empty disjunction is `false`.
    pub fn disjunction<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        let mut iter = items.into_iter();
        match iter.next() {
            None => Formula::Bottom,
            Some(first) => iter.fold(first, Formula::or),
        }
    }

    /// Number of nodes in the abstract syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Bottom | Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Box(f) => 1 + f.size(),
            Formula::And(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Maximal nesting of boxes.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Bottom | Formula::Atom(_) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::Box(f) => 1 + f.modal_depth(),
            Formula::And(a, b) => a.modal_depth().max(b.modal_depth()),
        }
    }

    pub fn atoms(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<u32>) {
        match self {
            Formula::Bottom => {}
            Formula::Atom(i) => {
                out.insert(*i);
            }
            Formula::Not(f) | Formula::Box(f) => f.collect_atoms(out),
            Formula::And(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Deterministic, fully parenthesised rendering accepted by [`parse`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            Formula::Bottom => out.push_str("false"),
            Formula::Atom(i) => {
                out.push('p');
                out.push_str(&i.to_string());
            }
            Formula::Not(f) => {
                out.push_str("~(");
                f.render_into(out);
                out.push(')');
            }
            Formula::Box(f) => {
                out.push_str("[](");
                f.render_into(out);
                out.push(')');
            }
            Formula::And(a, b) => {
                out.push('(');
                a.render_into(out);
                out.push_str(" & ");
                b.render_into(out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Renders `phi`; see [`Formula::render`].
pub fn render(phi: &Formula) -> String {
    phi.render()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("atom index overflow at byte {position}")]
    AtomOverflow { position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    False,
    True,
    Atom(u32),
    Not,
    And,
    Or,
    Implies,
    Iff,
    Box,
    Diamond,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let syntax = |position: usize, message: &str| ParseError::Syntax {
        position,
        message: message.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let token = if rest.starts_with("<->") {
            i += 3;
            Token::Iff
        } else if rest.starts_with("<>") {
            i += 2;
            Token::Diamond
        } else if rest.starts_with("->") {
            i += 2;
            Token::Implies
        } else if rest.starts_with("[]") {
            i += 2;
            Token::Box
        } else if rest.starts_with("false") {
            i += 5;
            Token::False
        } else if rest.starts_with("true") {
            i += 4;
            Token::True
        } else {
            match c {
                b'~' => {
                    i += 1;
                    Token::Not
                }
                b'&' => {
                    i += 1;
                    Token::And
                }
                b'|' => {
                    i += 1;
                    Token::Or
                }
                b'(' => {
                    i += 1;
                    Token::LParen
                }
                b')' => {
                    i += 1;
                    Token::RParen
                }
                b'p' => {
                    i += 1;
                    let digits_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if digits_start == i {
                        return Err(syntax(start, "expected a decimal index after 'p'"));
                    }
                    let index = text[digits_start..i]
                        .parse::<u32>()
                        .map_err(|_| ParseError::AtomOverflow { position: start })?;
                    Token::Atom(index)
                }
                _ => return Err(syntax(start, "unexpected character")),
            }
        };
        // keywords and atoms must not run into identifier characters
        if matches!(token, Token::False | Token::True | Token::Atom(_))
            && i < bytes.len()
            && bytes[i].is_ascii_alphanumeric()
        {
            return Err(syntax(start, "malformed identifier"));
        }
        tokens.push((start, token));
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).map(|(_, t)| *t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            position: self.offset(),
            message: message.to_string(),
        }
    }

    fn eat(&mut self, token: Token) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // iff := imp ("<->" imp)*
    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.implication()?;
        while self.eat(Token::Iff) {
            let right = self.implication()?;
            left = Formula::iff(left, right);
        }
        Ok(left)
    }

    // imp := or ("->" imp)?
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let left = self.disjunction()?;
        if self.eat(Token::Implies) {
            let right = self.implication()?;
            Ok(Formula::implies(left, right))
        } else {
            Ok(left)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.conjunction()?;
        while self.eat(Token::Or) {
            let right = self.conjunction()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        while self.eat(Token::And) {
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let Some(token) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        self.pos += 1;
        match token {
            Token::False => Ok(Formula::Bottom),
            Token::True => Ok(Formula::top()),
            Token::Atom(i) => Ok(Formula::Atom(i)),
            Token::Not => Ok(Formula::not(self.unary()?)),
            Token::Box => Ok(Formula::boxed(self.unary()?)),
            Token::Diamond => Ok(Formula::diamond(self.unary()?)),
            Token::LParen => {
                let inner = self.iff()?;
                if !self.eat(Token::RParen) {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a formula"))
            }
        }
    }
}

/// Parses the concrete syntax into core form.
///
/// Precedence from tightest: unary operators, `&`, `|`, `->` (right
/// associative), `<->`.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let formula = parser.iff()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("trailing input"));
    }
    Ok(formula)
}

/// Subformula closure of a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    /// Each distinct subformula once, children before parents.
    pub subformulas: Vec<Formula>,
    pub atoms: BTreeSet<u32>,
    /// `psi` for every subformula `[]psi`, in the order the boxes appear in
    /// `subformulas`.
    pub boxed: Vec<Formula>,
    pub depth: usize,
}

pub fn closure(phi: &Formula) -> Closure {
    fn visit(f: &Formula, seen: &mut HashSet<Formula>, out: &mut Vec<Formula>) {
        if seen.contains(f) {
            return;
        }
        match f {
            Formula::Bottom | Formula::Atom(_) => {}
            Formula::Not(g) | Formula::Box(g) => visit(g, seen, out),
            Formula::And(a, b) => {
                visit(a, seen, out);
                visit(b, seen, out);
            }
        }
        seen.insert(f.clone());
        out.push(f.clone());
    }

    let mut seen = HashSet::new();
    let mut subformulas = Vec::new();
    visit(phi, &mut seen, &mut subformulas);
    let boxed = subformulas
        .iter()
        .filter_map(|f| match f {
            Formula::Box(g) => Some((**g).clone()),
            _ => None,
        })
        .collect();
    Closure {
        atoms: phi.atoms(),
        depth: phi.modal_depth(),
        subformulas,
        boxed,
    }
}
