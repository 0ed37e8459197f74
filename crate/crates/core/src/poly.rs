//! Exact multivariate polynomials with rational coefficients.
//!
//! A [`Poly`] lives over an ordered [`CoordSet`]; every term key is a dense
//! exponent vector with one slot per coordinate. Zero coefficients are never
//! stored, so structural equality is mathematical equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{fmt_rational, Rational};

/// Errors raised by polynomial arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("coordinate sets differ: [{left}] vs [{right}]")]
    CoordMismatch { left: String, right: String },
    #[error("unknown coordinate `{0}`")]
    UnknownCoord(String),
    #[error("no value assigned to coordinate `{0}`")]
    MissingAssignment(String),
}

/// A named coordinate such as `z1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub name: String,
}

impl Coord {
    pub fn new(name: impl Into<String>) -> Self {
        Coord { name: name.into() }
    }
}

/// Ordered set of coordinates shared by a family of polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoordSet {
    coords: Vec<Coord>,
}

impl CoordSet {
    /// Builds a coordinate set; panics on duplicate names.
    pub fn new<S: AsRef<str>>(names: &[S]) -> Arc<Self> {
        let coords: Vec<Coord> = names.iter().map(|n| Coord::new(n.as_ref())).collect();
        for (i, c) in coords.iter().enumerate() {
            assert!(
                !coords[..i].contains(c),
                "duplicate coordinate name `{}`",
                c.name
            );
        }
        Arc::new(CoordSet { coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c.name == name)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.coords[i].name
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.coords.iter().map(|c| c.name.as_str())
    }

    fn joined(&self) -> String {
        self.names().collect::<Vec<_>>().join(",")
    }
}

/// Exponent vector, one entry per coordinate.
pub type Exponents = Vec<u32>;

/// Sparse polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coords: Arc<CoordSet>,
    terms: BTreeMap<Exponents, Rational>,
}

/// Binary operations accepted by [`Poly::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl Poly {
    pub fn zero(coords: &Arc<CoordSet>) -> Self {
        Poly {
            coords: coords.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(coords: &Arc<CoordSet>, c: Rational) -> Self {
        let mut p = Poly::zero(coords);
        p.add_term(vec![0; coords.len()], c);
        p
    }

    pub fn one(coords: &Arc<CoordSet>) -> Self {
        Poly::constant(coords, Rational::one())
    }

    /// The coordinate with index `i` as a degree-one polynomial.
    pub fn var(coords: &Arc<CoordSet>, i: usize) -> Self {
        let mut e = vec![0; coords.len()];
        e[i] = 1;
        Poly::monomial(coords, e, Rational::one())
    }

    pub fn var_named(coords: &Arc<CoordSet>, name: &str) -> Result<Self, PolyError> {
        let i = coords
            .index_of(name)
            .ok_or_else(|| PolyError::UnknownCoord(name.to_string()))?;
        Ok(Poly::var(coords, i))
    }

    pub fn monomial(coords: &Arc<CoordSet>, exps: Exponents, c: Rational) -> Self {
        assert_eq!(exps.len(), coords.len(), "exponent arity mismatch");
        let mut p = Poly::zero(coords);
        p.add_term(exps, c);
        p
    }

    fn add_term(&mut self, exps: Exponents, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn coords(&self) -> &Arc<CoordSet> {
        &self.coords
    }

    pub fn nvars(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Value if the polynomial has no variable dependence.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] > 0)
    }

    fn check_same(&self, other: &Poly) -> Result<(), PolyError> {
        if Arc::ptr_eq(&self.coords, &other.coords) || self.coords == other.coords {
            Ok(())
        } else {
            Err(PolyError::CoordMismatch {
                left: self.coords.joined(),
                right: other.coords.joined(),
            })
        }
    }

    /// Binary arithmetic with a coordinate-set check.
    pub fn arith(&self, other: &Poly, op: ArithOp) -> Result<Poly, PolyError> {
        self.check_same(other)?;
        Ok(match op {
            ArithOp::Add => {
                let mut r = self.clone();
                for (e, c) in &other.terms {
                    r.add_term(e.clone(), c.clone());
                }
                r
            }
            ArithOp::Sub => {
                let mut r = self.clone();
                for (e, c) in &other.terms {
                    r.add_term(e.clone(), -c.clone());
                }
                r
            }
            ArithOp::Mul => {
                let mut r = Poly::zero(&self.coords);
                for (ea, ca) in &self.terms {
                    for (eb, cb) in &other.terms {
                        let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                        r.add_term(e, ca * cb);
                    }
                }
                r
            }
        })
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.arith(other, ArithOp::Add)
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.arith(other, ArithOp::Sub)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.arith(other, ArithOp::Mul)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.coords);
        }
        Poly {
            coords: self.coords.clone(),
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut r = Poly::one(&self.coords);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// Partial derivative with respect to coordinate `var`.
    pub fn differentiate(&self, var: usize) -> Poly {
        let mut r = Poly::zero(&self.coords);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[var] -= 1;
            r.add_term(ne, c * Rational::from_integer(e[var].into()));
        }
        r
    }

    /// `order`-fold partial derivative with respect to `var`.
    pub fn differentiate_n(&self, var: usize, order: usize) -> Poly {
        let mut r = self.clone();
        for _ in 0..order {
            r = r.differentiate(var);
        }
        r
    }

    /// Antiderivative in `var` with zero constant of integration.
    pub fn antiderivative(&self, var: usize) -> Poly {
        let mut r = Poly::zero(&self.coords);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            ne[var] += 1;
            r.add_term(ne, c / Rational::from_integer((e[var] + 1).into()));
        }
        r
    }

    /// Replaces coordinate `var` by the value `x`. The arity is kept; the
    /// result no longer depends on `var`.
    pub fn substitute(&self, var: usize, x: &Rational) -> Poly {
        let mut r = Poly::zero(&self.coords);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne[var];
            ne[var] = 0;
            r.add_term(ne, c * rational_pow(x, k));
        }
        r
    }

    /// Exact definite integral over `var` from `lo` to `hi`.
    pub fn definite_integral(&self, var: usize, lo: &Rational, hi: &Rational) -> Poly {
        let a = self.antiderivative(var);
        &a.substitute(var, hi) - &a.substitute(var, lo)
    }

    /// Evaluates where every coordinate with nonzero exponent has a value.
    /// `assignment` is indexed by coordinate.
    pub fn eval(&self, assignment: &[Option<Rational>]) -> Result<Rational, PolyError> {
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let x = assignment
                    .get(i)
                    .and_then(|v| v.as_ref())
                    .ok_or_else(|| PolyError::MissingAssignment(self.coords.name(i).into()))?;
                t *= rational_pow(x, k);
            }
            total += t;
        }
        Ok(total)
    }

    /// Evaluates with a name-keyed assignment.
    pub fn eval_named(&self, assignment: &BTreeMap<String, Rational>) -> Result<Rational, PolyError> {
        let values: Vec<Option<Rational>> = self
            .coords
            .names()
            .map(|n| assignment.get(n).cloned())
            .collect();
        self.eval(&values)
    }

    /// Floating-point evaluation with all coordinates given.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (e, c) in &self.terms {
            let mut t = crate::rational::to_f64(c);
            for (i, &k) in e.iter().enumerate() {
                t *= x[i].powi(k as i32);
            }
            total += t;
        }
        total
    }

    /// Re-expresses the polynomial over a different coordinate set, mapping
    /// coordinates by name. Fails if a coordinate in use is absent.
    pub fn rebase(&self, target: &Arc<CoordSet>) -> Result<Poly, PolyError> {
        let map: Vec<Option<usize>> = self.coords.names().map(|n| target.index_of(n)).collect();
        let mut r = Poly::zero(target);
        for (e, c) in &self.terms {
            let mut ne = vec![0; target.len()];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let j = map[i].ok_or_else(|| PolyError::UnknownCoord(self.coords.name(i).into()))?;
                ne[j] = k;
            }
            r.add_term(ne, c.clone());
        }
        Ok(r)
    }
}

pub(crate) fn rational_pow(x: &Rational, k: u32) -> Rational {
    let mut r = Rational::one();
    for _ in 0..k {
        r *= x;
    }
    r
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $op:expr) => {
        impl $tr<&Poly> for &Poly {
            type Output = Poly;
            /// Panics if the coordinate sets differ; use [`Poly::arith`] to
            /// handle that case.
            fn $m(self, rhs: &Poly) -> Poly {
                self.arith(rhs, $op).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, ArithOp::Add);
forward_binop!(Sub, sub, ArithOp::Sub);
forward_binop!(Mul, mul, ArithOp::Mul);

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    /// Renders in the model-file syntax, e.g. `-z3 + 4/3*z3^3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| match k {
                    1 => self.coords.name(i).to_string(),
                    _ => format!("{}^{}", self.coords.name(i), k),
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", fmt_rational(&mag))?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", fmt_rational(&mag))?;
                }
                write!(f, "{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

/// Rectangular grid of polynomials over one coordinate set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(coords: &Arc<CoordSet>, rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            entries: vec![Poly::zero(coords); rows * cols],
        }
    }

    /// Builds from row vectors; panics if rows are ragged.
    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged PolyMatrix rows");
        PolyMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn row(&self, i: usize) -> &[Poly] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut out = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j).clone());
            }
        }
        PolyMatrix {
            rows: self.cols,
            cols: self.rows,
            entries: out,
        }
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, other.rows, "PolyMatrix shape mismatch");
        let coords = self.entries[0].coords().clone();
        let mut out = PolyMatrix::zeros(&coords, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Poly::zero(&coords);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Matrix times a column of polynomials.
    pub fn apply(&self, v: &[Poly]) -> Vec<Poly> {
        assert_eq!(v.len(), self.cols, "PolyMatrix/vector length mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Poly::zero(v[0].coords());
                for (k, vk) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if !a.is_zero() && !vk.is_zero() {
                        acc = &acc + &(a * vk);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn zero_columns(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|&j| (0..self.rows).all(|i| self.get(i, j).is_zero()))
            .collect()
    }

    pub fn zero_rows(&self) -> Vec<usize> {
        (0..self.rows)
            .filter(|&i| self.row(i).iter().all(Poly::is_zero))
            .collect()
    }
}

/// Random polynomial in the variables `vars` with integer coefficients in
/// `-3..=3` and total degree at most `max_degree`.
pub fn random_poly<R: rand::Rng + ?Sized>(
    coords: &Arc<CoordSet>,
    vars: &[usize],
    max_degree: u32,
    rng: &mut R,
) -> Poly {
    let mut out = Poly::zero(coords);
    let mut exps = vec![0u32; coords.len()];
    fn walk<R: rand::Rng + ?Sized>(
        out: &mut Poly,
        exps: &mut Vec<u32>,
        vars: &[usize],
        left: u32,
        rng: &mut R,
    ) {
        let Some((&v, rest)) = vars.split_first() else {
            let c: i64 = rng.gen_range(-3..=3);
            if c != 0 {
                let m = Poly::monomial(out.coords(), exps.clone(), Rational::from_integer(c.into()));
                *out = &*out + &m;
            }
            return;
        };
        for e in 0..=left {
            exps[v] = e;
            walk(out, exps, rest, left - e, rng);
        }
        exps[v] = 0;
    }
    walk(&mut out, &mut exps, vars, max_degree, rng);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn z3() -> Arc<CoordSet> {
        CoordSet::new(&["z1", "z2", "z3"])
    }

    #[test]
    fn square_of_coordinate() {
        let c = z3();
        let z = Poly::var(&c, 2);
        assert_eq!(&z * &z, Poly::monomial(&c, vec![0, 0, 2], rat(1, 1)));
    }

    #[test]
    fn derivative_of_cube() {
        let c = z3();
        let p = Poly::var(&c, 2).pow(3);
        assert_eq!(p.differentiate(2), Poly::monomial(&c, vec![0, 0, 2], rat(3, 1)));
    }

    #[test]
    fn reddy_kinematics_collapse() {
        // (z3 - a z3^3) + a z3^3 with a = 4/3 (h = 1)
        let c = z3();
        let z = Poly::var(&c, 2);
        let a = rat(4, 3);
        let lhs = &z - &z.pow(3).scale(&a);
        assert_eq!(&lhs + &z.pow(3).scale(&a), z);
    }

    #[test]
    fn second_moment_of_unit_interval() {
        let c = z3();
        let p = Poly::var(&c, 2).pow(2);
        let v = p.definite_integral(2, &rat(-1, 2), &rat(1, 2));
        assert_eq!(v.as_constant(), Some(rat(1, 12)));
    }

    #[test]
    fn odd_moment_vanishes() {
        let c = z3();
        let v = Poly::var(&c, 2).definite_integral(2, &rat(-3, 7), &rat(3, 7));
        assert!(v.is_zero());
    }

    #[test]
    fn polar_moment_of_unit_square() {
        let c = z3();
        let p = &Poly::var(&c, 1).pow(2) + &Poly::var(&c, 2).pow(2);
        let v = p
            .definite_integral(1, &rat(-1, 2), &rat(1, 2))
            .definite_integral(2, &rat(-1, 2), &rat(1, 2));
        assert_eq!(v.as_constant(), Some(rat(1, 6)));
    }

    #[test]
    fn evaluation() {
        let c = z3();
        let sq = Poly::var(&c, 2).pow(2);
        assert_eq!(sq.eval(&[None, None, Some(rat(1, 2))]).unwrap(), rat(1, 4));
        assert_eq!(Poly::constant(&c, rat(7, 3)).eval(&[]).unwrap(), rat(7, 3));
        let p = &(&Poly::var(&c, 0) * &Poly::var(&c, 2)) - &Poly::var(&c, 2).pow(3);
        let v = p.eval(&[Some(rat(2, 1)), None, Some(rat(1, 1))]).unwrap();
        assert_eq!(v, rat(1, 1));
        assert_eq!(
            p.eval(&[Some(rat(2, 1)), None, None]),
            Err(PolyError::MissingAssignment("z3".into()))
        );
    }

    #[test]
    fn mismatched_coordinates_are_rejected() {
        let a = Poly::var(&CoordSet::new(&["x"]), 0);
        let b = Poly::var(&CoordSet::new(&["y"]), 0);
        assert!(matches!(a.try_add(&b), Err(PolyError::CoordMismatch { .. })));
    }

    #[test]
    fn display_round_form() {
        let c = z3();
        let z = Poly::var(&c, 2);
        let p = &z.pow(3).scale(&rat(4, 3)) - &z;
        assert_eq!(p.to_string(), "-z3 + 4/3*z3^3");
    }
}
