//! Boolean rule expressions and their recursive-descent parser.
//!
//! Precedence, highest first: `!`, `&`, `^`, `|`, `->`, `<->`. Binary
//! operators associate to the left.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    /// State variable, 0-based (`x1` is `Var(0)`).
    Var(usize),
    Const(bool),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Xor(Box<BoolExpr>, Box<BoolExpr>),
    Implies(Box<BoolExpr>, Box<BoolExpr>),
    Iff(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn eval(&self, state: &[bool]) -> bool {
        match self {
            BoolExpr::Var(i) => state[*i],
            BoolExpr::Const(b) => *b,
            BoolExpr::Not(e) => !e.eval(state),
            BoolExpr::And(a, b) => a.eval(state) && b.eval(state),
            BoolExpr::Or(a, b) => a.eval(state) || b.eval(state),
            BoolExpr::Xor(a, b) => a.eval(state) != b.eval(state),
            BoolExpr::Implies(a, b) => !a.eval(state) || b.eval(state),
            BoolExpr::Iff(a, b) => a.eval(state) == b.eval(state),
        }
    }

    /// Largest 0-based variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            BoolExpr::Var(i) => Some(*i),
            BoolExpr::Const(_) => None,
            BoolExpr::Not(e) => e.max_var(),
            BoolExpr::And(a, b)
            | BoolExpr::Or(a, b)
            | BoolExpr::Xor(a, b)
            | BoolExpr::Implies(a, b)
            | BoolExpr::Iff(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn negate(e: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(e))
    }
}

/// Fully parenthesised rendering; parses back to the same tree.
impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bin = |f: &mut fmt::Formatter<'_>, a: &BoolExpr, op: &str, b: &BoolExpr| {
            write!(f, "({a} {op} {b})")
        };
        match self {
            BoolExpr::Var(i) => write!(f, "x{}", i + 1),
            BoolExpr::Const(b) => write!(f, "{}", u8::from(*b)),
            BoolExpr::Not(e) => write!(f, "!{e}"),
            BoolExpr::And(a, b) => bin(f, a, "&", b),
            BoolExpr::Or(a, b) => bin(f, a, "|", b),
            BoolExpr::Xor(a, b) => bin(f, a, "^", b),
            BoolExpr::Implies(a, b) => bin(f, a, "->", b),
            BoolExpr::Iff(a, b) => bin(f, a, "<->", b),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Var(usize),
    Const(bool),
    Not,
    And,
    Or,
    Xor,
    Implies,
    Iff,
    LParen,
    RParen,
}

struct Lexed {
    tok: Tok,
    col: usize,
}

fn lex(src: &str, line: usize, col0: usize) -> Result<Vec<Lexed>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |i: usize, msg: String| Error::Syntax {
        line,
        column: col0 + i,
        message: msg,
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '!' | '~' => {
                i += 1;
                Tok::Not
            }
            '&' => {
                i += 1;
                Tok::And
            }
            '|' => {
                i += 1;
                Tok::Or
            }
            '^' => {
                i += 1;
                Tok::Xor
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 2;
                Tok::Implies
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                i += 3;
                Tok::Iff
            }
            '0' | '1' => {
                i += 1;
                Tok::Const(c == '1')
            }
            'x' | 'X' => {
                i += 1;
                let digits_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i == digits_start {
                    return Err(err(start, "expected variable index after 'x'".into()));
                }
                let s: String = chars[digits_start..i].iter().collect();
                let idx: usize = s
                    .parse()
                    .map_err(|_| err(start, format!("bad variable index '{s}'")))?;
                if idx == 0 {
                    return Err(err(start, "variables are numbered from x1".into()));
                }
                Tok::Var(idx - 1)
            }
            other => return Err(err(start, format!("unexpected character '{other}'"))),
        };
        out.push(Lexed { tok, col: start });
        if i < chars.len()
            && chars[i].is_alphanumeric()
            && matches!(out.last().unwrap().tok, Tok::Var(_) | Tok::Const(_))
        {
            return Err(err(i, format!("unexpected character '{}'", chars[i])));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Lexed],
    pos: usize,
    line: usize,
    col0: usize,
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let column = self
            .toks
            .get(self.pos)
            .map(|l| self.col0 + l.col)
            .unwrap_or(self.end_col);
        Error::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn binary(
        &mut self,
        op: Tok,
        next: fn(&mut Self) -> Result<BoolExpr>,
        build: fn(Box<BoolExpr>, Box<BoolExpr>) -> BoolExpr,
    ) -> Result<BoolExpr> {
        let mut lhs = next(self)?;
        while self.peek() == Some(&op) {
            self.pos += 1;
            let rhs = next(self)?;
            lhs = build(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn iff(&mut self) -> Result<BoolExpr> {
        self.binary(Tok::Iff, Self::implies, BoolExpr::Iff)
    }

    fn implies(&mut self) -> Result<BoolExpr> {
        self.binary(Tok::Implies, Self::or, BoolExpr::Implies)
    }

    fn or(&mut self) -> Result<BoolExpr> {
        self.binary(Tok::Or, Self::xor, BoolExpr::Or)
    }

    fn xor(&mut self) -> Result<BoolExpr> {
        self.binary(Tok::Xor, Self::and, BoolExpr::Xor)
    }

    fn and(&mut self) -> Result<BoolExpr> {
        self.binary(Tok::And, Self::unary, BoolExpr::And)
    }

    fn unary(&mut self) -> Result<BoolExpr> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(BoolExpr::negate(self.unary()?))
            }
            Some(Tok::Var(i)) => {
                let i = *i;
                self.pos += 1;
                Ok(BoolExpr::Var(i))
            }
            Some(Tok::Const(b)) => {
                let b = *b;
                self.pos += 1;
                Ok(BoolExpr::Const(b))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.iff()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(_) => Err(self.error("expected a variable, constant, '!' or '('")),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}

/// Parses an expression; `line` and `column` locate `src` for diagnostics.
pub fn parse_expr_at(src: &str, line: usize, column: usize) -> Result<BoolExpr> {
    let toks = lex(src, line, column)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        line,
        col0: column,
        end_col: column + src.chars().count(),
    };
    let e = p.iff()?;
    if p.pos != toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

pub fn parse_expr(src: &str) -> Result<BoolExpr> {
    parse_expr_at(src, 1, 1)
}
