//! Regular expressions over operation names describing sets of
//! reconfiguration paths, and their compilation to prefix-closed
//! deterministic automata.

mod automaton;
mod compile;

use std::fmt;

use crate::error::ParseError;
use crate::lex::{Cursor, Tok};
use crate::ops::OpTable;

pub use automaton::{Automaton, StateId, Transition};
pub use compile::compile;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathExpr {
    Op(String),
    Seq(Box<PathExpr>, Box<PathExpr>),
    Alt(Box<PathExpr>, Box<PathExpr>),
    Opt(Box<PathExpr>),
    Star(Box<PathExpr>),
    Plus(Box<PathExpr>),
}

impl PathExpr {
    pub fn op(name: &str) -> Self {
        PathExpr::Op(name.to_string())
    }

    pub fn seq(a: PathExpr, b: PathExpr) -> Self {
        PathExpr::Seq(Box::new(a), Box::new(b))
    }

    pub fn alt(a: PathExpr, b: PathExpr) -> Self {
        PathExpr::Alt(Box::new(a), Box::new(b))
    }

    pub fn opt(a: PathExpr) -> Self {
        PathExpr::Opt(Box::new(a))
    }

    pub fn star(a: PathExpr) -> Self {
        PathExpr::Star(Box::new(a))
    }

    pub fn plus(a: PathExpr) -> Self {
        PathExpr::Plus(Box::new(a))
    }

    /// Operation names in order of first occurrence.
    pub fn operations(&self) -> Vec<&str> {
        fn go<'a>(e: &'a PathExpr, out: &mut Vec<&'a str>) {
            match e {
                PathExpr::Op(n) => {
                    if !out.contains(&n.as_str()) {
                        out.push(n)
                    }
                }
                PathExpr::Seq(a, b) | PathExpr::Alt(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                PathExpr::Opt(a) | PathExpr::Star(a) | PathExpr::Plus(a) => go(a, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            PathExpr::Op(_) => 1,
            PathExpr::Seq(a, b) | PathExpr::Alt(a, b) => 1 + a.size() + b.size(),
            PathExpr::Opt(a) | PathExpr::Star(a) | PathExpr::Plus(a) => 1 + a.size(),
        }
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathExpr::Op(n) => f.write_str(n),
            PathExpr::Seq(a, b) => {
                write_wrapped(f, a, matches!(**a, PathExpr::Alt(..)))?;
                f.write_str(" ")?;
                write_wrapped(f, b, matches!(**b, PathExpr::Alt(..) | PathExpr::Seq(..)))
            }
            PathExpr::Alt(a, b) => {
                write!(f, "{a} | ")?;
                write_wrapped(f, b, matches!(**b, PathExpr::Alt(..)))
            }
            PathExpr::Opt(a) | PathExpr::Star(a) | PathExpr::Plus(a) => {
                write_wrapped(f, a, !matches!(**a, PathExpr::Op(_)))?;
                f.write_str(match self {
                    PathExpr::Opt(_) => "?",
                    PathExpr::Star(_) => "*",
                    _ => "+",
                })
            }
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &PathExpr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Parses the path language: juxtaposition is sequence, `|` alternation,
/// postfix `?`, `*`, `+` bind tightest. Every name must be in `ops`.
pub fn parse_path(text: &str, ops: &OpTable) -> Result<PathExpr, ParseError> {
    let mut cur = Cursor::new(text)?;
    if cur.at_end() {
        return Err(cur.error("empty path expression"));
    }
    let e = alternation(&mut cur, ops)?;
    if !cur.at_end() {
        return Err(cur.error(format!("unexpected {}", cur.found())));
    }
    Ok(e)
}

fn alternation(cur: &mut Cursor, ops: &OpTable) -> Result<PathExpr, ParseError> {
    let mut e = sequence(cur, ops)?;
    while cur.eat_sym("|") {
        e = PathExpr::alt(e, sequence(cur, ops)?);
    }
    Ok(e)
}

fn starts_atom(cur: &Cursor) -> bool {
    matches!(cur.peek(), Some(Tok::Ident(_))) || cur.is_sym("(")
}

fn sequence(cur: &mut Cursor, ops: &OpTable) -> Result<PathExpr, ParseError> {
    let mut e = postfix(cur, ops)?;
    while starts_atom(cur) {
        e = PathExpr::seq(e, postfix(cur, ops)?);
    }
    Ok(e)
}

fn postfix(cur: &mut Cursor, ops: &OpTable) -> Result<PathExpr, ParseError> {
    let mut e = atom(cur, ops)?;
    loop {
        e = if cur.eat_sym("?") {
            PathExpr::opt(e)
        } else if cur.eat_sym("*") {
            PathExpr::star(e)
        } else if cur.eat_sym("+") {
            PathExpr::plus(e)
        } else {
            return Ok(e);
        };
    }
}

fn atom(cur: &mut Cursor, ops: &OpTable) -> Result<PathExpr, ParseError> {
    if cur.eat_sym("(") {
        let e = alternation(cur, ops)?;
        cur.expect_sym(")")?;
        return Ok(e);
    }
    match cur.peek() {
        Some(Tok::Ident(name)) => {
            if !ops.contains(name) {
                return Err(cur.error(format!("unknown operation `{name}`")));
            }
            let name = name.clone();
            cur.next();
            Ok(PathExpr::Op(name))
        }
        _ => Err(cur.error(format!("expected an operation or `(`, found {}", cur.found()))),
    }
}
