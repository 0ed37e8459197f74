//! Expression grammar shared by every model-file section.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | atom ['^' integer]
//! atom   := integer | name | 'd'<axis> | '(' expr ')'
//! ```
//!
//! Names resolve to coordinates first, then to bound parameters. `dK`
//! denotes the pure partial derivative along axis K and is accepted only
//! where an operator entry is expected. A product of derivatives along two
//! different axes is rejected.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use thiserror::Error;

use crate::poly::{CoordSet, Poly};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoord(String),
    #[error("constant `{0}` has no binding")]
    Unbound(String),
    #[error(
        "mixed partial derivative d{0}*d{1} is outside the supported operator class \
         (each term may differentiate along a single axis only)"
    )]
    MixedDerivative(usize, usize),
}

impl From<&str> for ExprError {
    fn from(s: &str) -> Self {
        ExprError::Syntax(s.to_string())
    }
}

impl From<String> for ExprError {
    fn from(s: String) -> Self {
        ExprError::Syntax(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && (chars[i] == '.' || chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '.') {
                    j += 1;
                }
                let lit: String = chars[start..j].iter().collect();
                return Err(ExprError::Syntax(format!(
                    "decimal literal `{lit}` is not allowed; write exact rationals such as 3/10"
                )));
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Int(s.parse().expect("digits parse")));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Name(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(ExprError::Syntax(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Linear combination of pure derivatives with polynomial coefficients.
/// Key `(0, 0)` is the multiplication (zeroth-order) part.
pub type OpTerms = BTreeMap<(usize, usize), Poly>;

/// What an expression may contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Allow {
    /// Constants only: parameters and literals.
    Constant,
    /// Polynomials in the coordinates.
    Poly,
    /// Operator entries: coordinates and `dK` symbols.
    Operator,
}

pub struct ExprContext<'a> {
    pub coords: &'a Arc<CoordSet>,
    pub params: &'a BTreeMap<String, Rational>,
    pub allow: Allow,
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    ctx: &'a ExprContext<'a>,
}

fn derivative_axis(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('d')?;
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok().filter(|&k| k > 0)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn constant(&self, c: Rational) -> OpTerms {
        let mut m = OpTerms::new();
        if !c.is_zero() {
            m.insert((0, 0), Poly::constant(self.ctx.coords, c));
        }
        m
    }

    fn expr(&mut self) -> Result<OpTerms, ExprError> {
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let mut acc = self.term()?;
        if neg {
            acc = scale(&acc, &-Rational::one());
        }
        loop {
            if self.eat('+') {
                let t = self.term()?;
                acc = add(&acc, &t);
            } else if self.eat('-') {
                let t = self.term()?;
                acc = add(&acc, &scale(&t, &-Rational::one()));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<OpTerms, ExprError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                let f = self.factor()?;
                acc = mul(&acc, &f)?;
            } else if self.eat('/') {
                let f = self.factor()?;
                let c = as_constant(&f).ok_or("division by a non-constant expression")?;
                if c.is_zero() {
                    return Err("division by zero".into());
                }
                acc = scale(&acc, &(Rational::one() / c));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<OpTerms, ExprError> {
        if self.eat('-') {
            let f = self.factor()?;
            return Ok(scale(&f, &-Rational::one()));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let e = match self.peek() {
                Some(Tok::Int(k)) => k.clone(),
                _ => return Err("exponent must be a non-negative integer literal".into()),
            };
            self.pos += 1;
            let e: u32 = e.try_into().map_err(|_| ExprError::from("exponent too large"))?;
            let mut r = self.constant(Rational::one());
            for _ in 0..e {
                r = mul(&r, &base)?;
            }
            return Ok(r);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<OpTerms, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                self.pos += 1;
                Ok(self.constant(Rational::from_integer(k)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err("missing `)`".into());
                }
                Ok(e)
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                if let Some(i) = self.ctx.coords.index_of(&name) {
                    if self.ctx.allow == Allow::Constant {
                        return Err(format!("coordinate `{name}` is not allowed here").into());
                    }
                    let mut m = OpTerms::new();
                    m.insert((0, 0), Poly::var(self.ctx.coords, i));
                    return Ok(m);
                }
                if let Some(v) = self.ctx.params.get(&name) {
                    return Ok(self.constant(v.clone()));
                }
                if let Some(axis) = derivative_axis(&name) {
                    if self.ctx.allow != Allow::Operator {
                        return Err(
                            format!("derivative `{name}` is only allowed in operator entries").into()
                        );
                    }
                    let mut m = OpTerms::new();
                    m.insert((axis, 1), Poly::one(self.ctx.coords));
                    return Ok(m);
                }
                if looks_like_coordinate(&name, self.ctx.coords) {
                    return Err(ExprError::UnknownCoord(name));
                }
                Err(ExprError::Unbound(name))
            }
            Some(Tok::Sym(c)) => Err(format!("unexpected `{c}`").into()),
            None => Err("unexpected end of expression".into()),
        }
    }
}

fn stem(name: &str) -> (&str, bool) {
    let t = name.trim_end_matches(|c: char| c.is_ascii_digit());
    (t, t.len() < name.len())
}

/// `z7` when the coordinates are `z1 z2 z3`.
fn looks_like_coordinate(name: &str, coords: &CoordSet) -> bool {
    let (s, numbered) = stem(name);
    numbered && !s.is_empty() && coords.names().any(|c| stem(c) == (s, true))
}

fn add(a: &OpTerms, b: &OpTerms) -> OpTerms {
    let mut r = a.clone();
    for (k, p) in b {
        let sum = match r.get(k) {
            Some(q) => q + p,
            None => p.clone(),
        };
        if sum.is_zero() {
            r.remove(k);
        } else {
            r.insert(*k, sum);
        }
    }
    r
}

fn scale(a: &OpTerms, c: &Rational) -> OpTerms {
    if c.is_zero() {
        return OpTerms::new();
    }
    a.iter().map(|(k, p)| (*k, p.scale(c))).collect()
}

fn mul(a: &OpTerms, b: &OpTerms) -> Result<OpTerms, ExprError> {
    let mut r = OpTerms::new();
    for (&(ka, ia), pa) in a {
        for (&(kb, ib), pb) in b {
            let key = match (ka, kb) {
                (0, _) => (kb, ib),
                (_, 0) => (ka, ia),
                _ if ka == kb => (ka, ia + ib),
                _ => {
                    return Err(ExprError::MixedDerivative(ka, kb))
                }
            };
            r = add(&r, &BTreeMap::from([(key, pa * pb)]));
        }
    }
    Ok(r)
}

fn as_constant(t: &OpTerms) -> Option<Rational> {
    match t.len() {
        0 => Some(Rational::zero()),
        1 => t.get(&(0, 0)).and_then(Poly::as_constant),
        _ => None,
    }
}

/// Parses one expression into operator terms.
pub fn parse_terms(src: &str, ctx: &ExprContext<'_>) -> Result<OpTerms, ExprError> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser { toks, pos: 0, ctx };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("unexpected trailing input in `{src}`").into());
    }
    Ok(e)
}

pub fn parse_constant(src: &str, ctx: &ExprContext<'_>) -> Result<Rational, ExprError> {
    let c = ExprContext {
        allow: Allow::Constant,
        ..*ctx
    };
    let t = parse_terms(src, &c)?;
    as_constant(&t).ok_or_else(|| ExprError::Syntax(format!("`{src}` is not a constant")))
}

pub fn parse_poly(src: &str, ctx: &ExprContext<'_>) -> Result<Poly, ExprError> {
    let c = ExprContext {
        allow: Allow::Poly,
        ..*ctx
    };
    let t = parse_terms(src, &c)?;
    Ok(t.get(&(0, 0)).cloned().unwrap_or_else(|| Poly::zero(ctx.coords)))
}

/// Splits on commas that are not nested inside parentheses.
pub fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur.trim().to_string());
    out
}

/// Renders operator terms as text accepted by [`parse_terms`].
pub fn format_terms(t: &OpTerms) -> String {
    if t.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (&(k, i), p) in t {
        if k == 0 {
            parts.push(format!("({p})"));
            continue;
        }
        let d = if i == 1 {
            format!("d{k}")
        } else {
            format!("d{k}^{i}")
        };
        match p.as_constant() {
            Some(c) if c.is_one() => parts.push(d),
            _ => parts.push(format!("({p})*{d}")),
        }
    }
    parts.join(" + ")
}
