//! Quantifier-free formulas over pair atoms.
//!
//! Grammar (indices are 1-based):
//!
//! ```text
//! or   := and ('|' and)*
//! and  := not ('&' not)*
//! not  := '!' not | atom | '(' or ')'
//! atom := ('E' | 'N' | 'Eq' | 'eq' | 'neq') '(' int ',' int ')' | 'true' | 'false'
//! ```

use std::fmt;

use super::base::{BaseStructure, PairType};
use super::matrix::{type_space, TypeMatrix, DEFAULT_ARITY_CAP};
use super::relation::OrbitRelation;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomKind {
    /// `E(i,j)`: an edge.
    Edge,
    /// `N(i,j)`: distinct and not adjacent (distinct, over equality).
    NonEdge,
    /// `Eq(i,j)`: an edge or equal.
    EdgeOrEqual,
    /// `eq(i,j)`.
    Equal,
    /// `neq(i,j)`.
    NotEqual,
}

impl AtomKind {
    fn holds(self, v: PairType) -> bool {
        match self {
            AtomKind::Edge => v == PairType::E,
            AtomKind::NonEdge => v == PairType::N,
            AtomKind::EdgeOrEqual => v.is_eq(),
            AtomKind::Equal => v == PairType::Equal,
            AtomKind::NotEqual => v != PairType::Equal,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            AtomKind::Edge => "E",
            AtomKind::NonEdge => "N",
            AtomKind::EdgeOrEqual => "Eq",
            AtomKind::Equal => "eq",
            AtomKind::NotEqual => "neq",
        }
    }
}

/// Parsed formula; atom indices are stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Const(bool),
    Atom(AtomKind, usize, usize),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn parse(text: &str) -> Result<Formula> {
        let mut p = Parser { src: text, pos: 0 };
        let f = p.or()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(p.error("trailing input"));
        }
        Ok(f)
    }

    /// Largest index mentioned, plus one.
    pub fn min_arity(&self) -> usize {
        match self {
            Formula::Const(_) => 0,
            Formula::Atom(_, i, j) => i.max(j) + 1,
            Formula::Not(f) => f.min_arity(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(Formula::min_arity).max().unwrap_or(0)
            }
        }
    }

    pub fn eval(&self, m: &TypeMatrix) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Atom(kind, i, j) => kind.holds(m.get(*i, *j)),
            Formula::Not(f) => !f.eval(m),
            Formula::And(fs) => fs.iter().all(|f| f.eval(m)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(m)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(b) => write!(f, "{b}"),
            Formula::Atom(kind, i, j) => write!(f, "{}({},{})", kind.keyword(), i + 1, j + 1),
            Formula::Not(g) => write!(f, "!{g}"),
            Formula::And(gs) | Formula::Or(gs) => {
                let op = if matches!(self, Formula::And(_)) {
                    "&"
                } else {
                    "|"
                };
                write!(f, "(")?;
                for (idx, g) in gs.iter().enumerate() {
                    if idx > 0 {
                        write!(f, "{op}")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// The relation of all valid arity-`k` types satisfying `text`.
pub fn compile_formula(text: &str, k: usize, base: &BaseStructure) -> Result<OrbitRelation> {
    compile_formula_with_cap(text, k, base, DEFAULT_ARITY_CAP)
}

pub fn compile_formula_with_cap(
    text: &str,
    k: usize,
    base: &BaseStructure,
    cap: usize,
) -> Result<OrbitRelation> {
    let f = Formula::parse(text)?;
    if f.min_arity() > k {
        return Err(Error::Parse {
            pos: 0,
            msg: format!("index {} out of range for arity {k}", f.min_arity()),
        });
    }
    if k > cap {
        return Err(Error::CapExceeded {
            what: "arity",
            value: k,
            cap,
        });
    }
    let space = type_space(k, base);
    let types = space.iter().filter(|t| f.eval(t)).cloned();
    OrbitRelation::new(text, k, types)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut parts = vec![self.and()?];
        while self.eat('|') {
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn and(&mut self) -> Result<Formula> {
        let mut parts = vec![self.not()?];
        while self.eat('&') {
            parts.push(self.not()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn not(&mut self) -> Result<Formula> {
        if self.eat('!') {
            return Ok(Formula::Not(Box::new(self.not()?)));
        }
        if self.eat('(') {
            let f = self.or()?;
            self.expect(')')?;
            return Ok(f);
        }
        self.atom()
    }

    fn ident(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn index(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let n: usize = self.src[start..self.pos]
            .parse()
            .map_err(|_| self.error("expected an index"))?;
        if n == 0 {
            return Err(Error::Parse {
                pos: start,
                msg: "indices are 1-based".into(),
            });
        }
        Ok(n - 1)
    }

    fn atom(&mut self) -> Result<Formula> {
        let start = self.pos;
        let kind = match self.ident() {
            "E" => AtomKind::Edge,
            "N" => AtomKind::NonEdge,
            "Eq" => AtomKind::EdgeOrEqual,
            "eq" => AtomKind::Equal,
            "neq" => AtomKind::NotEqual,
            "true" => return Ok(Formula::Const(true)),
            "false" => return Ok(Formula::Const(false)),
            "" => return Err(self.error("expected an atom")),
            other => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unknown atom `{other}`"),
                })
            }
        };
        self.expect('(')?;
        let i = self.index()?;
        self.expect(',')?;
        let j = self.index()?;
        self.expect(')')?;
        Ok(Formula::Atom(kind, i, j))
    }
}
