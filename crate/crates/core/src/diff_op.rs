//! Matrix differential operators `F w = P0 w + Σ_k Σ_i P_k(i) ∂_k^i w` with
//! constant coefficients, their formal adjoints, jets, and the boundary
//! quadratic form produced by integrating `vᵀ F w` by parts.
//!
//! Axis `k` (1-based) acts on polynomial variable `k - 1`, so fields are
//! expected over coordinate sets whose leading entries are the distributed
//! coordinates.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::matrix::RatMatrix;
use crate::poly::Poly;
use crate::rational::{fmt_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffOpError {
    #[error("coefficient for axis {axis}, order {order} has shape {got:?}, expected {expected:?}")]
    Shape {
        axis: usize,
        order: usize,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("axis {axis} outside 1..={ell}")]
    Axis { axis: usize, ell: usize },
    #[error("derivative order must be at least 1")]
    ZeroOrder,
    #[error("expected {expected} fields, got {got}")]
    Length { expected: usize, got: usize },
    #[error("domain lower bound is not below upper bound on axis {0}")]
    EmptyDomain(usize),
    #[error("field depends on coordinates outside the distributed domain")]
    NotDistributed,
    #[error("field has {vars} coordinates but the operator needs at least {ell}")]
    TooFewCoords { vars: usize, ell: usize },
}

/// Operator in the constant-coefficient class with pure partial powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOpMatrix {
    m: usize,
    n: usize,
    ell: usize,
    order: usize,
    p0: RatMatrix,
    terms: BTreeMap<(usize, usize), RatMatrix>,
}

impl DiffOpMatrix {
    /// `terms` maps `(axis, order)` to an `m × n` coefficient. Zero
    /// coefficients are dropped and `N` is set to the largest order left.
    pub fn new(
        m: usize,
        n: usize,
        ell: usize,
        p0: RatMatrix,
        terms: impl IntoIterator<Item = ((usize, usize), RatMatrix)>,
    ) -> Result<Self, DiffOpError> {
        if p0.shape() != (m, n) {
            return Err(DiffOpError::Shape {
                axis: 0,
                order: 0,
                got: p0.shape(),
                expected: (m, n),
            });
        }
        let mut map = BTreeMap::new();
        for ((axis, order), c) in terms {
            if axis == 0 || axis > ell {
                return Err(DiffOpError::Axis { axis, ell });
            }
            if order == 0 {
                return Err(DiffOpError::ZeroOrder);
            }
            if c.shape() != (m, n) {
                return Err(DiffOpError::Shape {
                    axis,
                    order,
                    got: c.shape(),
                    expected: (m, n),
                });
            }
            let slot = map
                .entry((axis, order))
                .or_insert_with(|| RatMatrix::zeros(m, n));
            *slot = slot.add(&c);
        }
        map.retain(|_, c: &mut RatMatrix| !c.is_zero());
        let order = map.keys().map(|&(_, i)| i).max().unwrap_or(0);
        Ok(DiffOpMatrix {
            m,
            n,
            ell,
            order,
            p0,
            terms: map,
        })
    }

    /// Output dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Input dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Highest derivative order `N` (0 for a pure multiplication).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn p0(&self) -> &RatMatrix {
        &self.p0
    }

    pub fn coefficient(&self, axis: usize, order: usize) -> Option<&RatMatrix> {
        self.terms.get(&(axis, order))
    }

    /// Nonzero derivative coefficients keyed by `(axis, order)`.
    pub fn terms(&self) -> &BTreeMap<(usize, usize), RatMatrix> {
        &self.terms
    }

    /// Coefficients `P0ᵀ` and `(-1)^i P_k(i)ᵀ`.
    pub fn formal_adjoint(&self) -> DiffOpMatrix {
        let terms = self.terms.iter().map(|(&(k, i), c)| {
            let t = c.transpose();
            let t = if i % 2 == 1 { t.scale(&-Rational::one()) } else { t };
            ((k, i), t)
        });
        DiffOpMatrix::new(self.n, self.m, self.ell, self.p0.transpose(), terms)
            .expect("adjoint of a valid operator is valid")
    }

    fn check_fields(&self, w: &[Poly], expected: usize) -> Result<(), DiffOpError> {
        if w.len() != expected {
            return Err(DiffOpError::Length {
                expected,
                got: w.len(),
            });
        }
        if let Some(p) = w.first() {
            if p.nvars() < self.ell {
                return Err(DiffOpError::TooFewCoords {
                    vars: p.nvars(),
                    ell: self.ell,
                });
            }
        }
        Ok(())
    }

    /// Exact `F w` for a column of `n` polynomials.
    pub fn apply(&self, w: &[Poly]) -> Result<Vec<Poly>, DiffOpError> {
        self.check_fields(w, self.n)?;
        let coords = w[0].coords().clone();
        let mut out = vec![Poly::zero(&coords); self.m];
        let mut add = |c: &RatMatrix, field: &dyn Fn(usize) -> Poly| {
            for col in 0..self.n {
                let mut fcol: Option<Poly> = None;
                for (row, acc) in out.iter_mut().enumerate() {
                    let k = c.get(row, col);
                    if k.is_zero() {
                        continue;
                    }
                    let f = fcol.get_or_insert_with(|| field(col));
                    *acc = &*acc + &f.scale(k);
                }
            }
        };
        add(&self.p0, &|c| w[c].clone());
        for (&(k, i), c) in &self.terms {
            add(c, &|col| w[col].differentiate_n(k - 1, i));
        }
        Ok(out)
    }

    /// Whether entry `(row, col)` is identically zero as an operator.
    pub fn entry_is_zero(&self, row: usize, col: usize) -> bool {
        self.p0.get(row, col).is_zero() && self.terms.values().all(|c| c.get(row, col).is_zero())
    }

    /// Text form of one entry, e.g. `d1`, `-1`, `2*d1^2 - 1`.
    pub fn entry_text(&self, row: usize, col: usize) -> String {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (&(k, i), c) in &self.terms {
            let v = c.get(row, col);
            if v.is_zero() {
                continue;
            }
            let d = if i == 1 {
                format!("d{k}")
            } else {
                format!("d{k}^{i}")
            };
            let mag = v.abs();
            let body = if mag.is_one() {
                d
            } else {
                format!("{}*{d}", fmt_rational(&mag))
            };
            parts.push((v.is_negative(), body));
        }
        let v = self.p0.get(row, col);
        if !v.is_zero() {
            parts.push((v.is_negative(), fmt_rational(&v.abs())));
        }
        if parts.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (idx, (neg, body)) in parts.into_iter().enumerate() {
            match (idx, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            s.push_str(&body);
        }
        s
    }

    /// Replaces one coefficient matrix; used to build corrupted operators in
    /// mutation tests.
    pub fn with_coefficient(&self, axis: usize, order: usize, c: RatMatrix) -> DiffOpMatrix {
        let mut terms = self.terms.clone();
        terms.insert((axis, order), c);
        DiffOpMatrix::new(self.m, self.n, self.ell, self.p0.clone(), terms)
            .expect("replacement coefficient has the operator's shape")
    }

    pub fn with_p0(&self, p0: RatMatrix) -> DiffOpMatrix {
        DiffOpMatrix::new(self.m, self.n, self.ell, p0, self.terms.clone())
            .expect("replacement coefficient has the operator's shape")
    }

    /// Number of derivative orders carried by the jet, at least one slot.
    fn jet_orders(&self) -> usize {
        self.order.max(1)
    }

    pub fn boundary_form(&self) -> BoundaryForm {
        BoundaryForm {
            n: self.n,
            m: self.m,
            ell: self.ell,
            order: self.jet_orders(),
            coeff_t: self
                .terms
                .iter()
                .map(|(&key, c)| (key, c.transpose()))
                .collect(),
        }
    }
}

/// A field stacked with its pure derivatives up to order `N - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetVector {
    pub base: Vec<Poly>,
    /// `derivs[j - 1][k - 1]` holds `∂_k^j` of the base field.
    pub derivs: Vec<Vec<Vec<Poly>>>,
}

impl JetVector {
    /// Flattened as `[w; ∂1 w … ∂ℓ w; ∂1² w … ∂ℓ² w; …]`.
    pub fn flatten(&self) -> Vec<Poly> {
        let mut out = self.base.clone();
        for order in &self.derivs {
            for axis in order {
                out.extend(axis.iter().cloned());
            }
        }
        out
    }
}

/// Jet of `w` up to order `N - 1` of `d`.
pub fn jet(w: &[Poly], d: &DiffOpMatrix) -> JetVector {
    let top = d.jet_orders() - 1;
    let derivs = (1..=top)
        .map(|j| {
            (1..=d.ell)
                .map(|k| w.iter().map(|p| p.differentiate_n(k - 1, j)).collect())
                .collect()
        })
        .collect();
    JetVector {
        base: w.to_vec(),
        derivs,
    }
}

/// Boundary blocks `P_∂, W_i, V_i, Λ_i`, linear in the outward normal.
///
/// Row blocks follow the jet of the input-side field `w` (size `n`), column
/// blocks the jet of the output-side field `v` (size `m`). Block `(a, b)` is
/// `(-1)^b` times the order-`a+b+1` coefficients when `a + b + 1 ≤ N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryForm {
    n: usize,
    m: usize,
    ell: usize,
    order: usize,
    coeff_t: BTreeMap<(usize, usize), RatMatrix>,
}

impl BoundaryForm {
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Jet order N used for block layout (at least 1).
    pub fn order(&self) -> usize {
        self.order
    }

    /// Shape of the assembled `Q_∂`.
    pub fn shape(&self) -> (usize, usize) {
        let extra = (self.order - 1) * self.ell;
        (self.n * (1 + extra), self.m * (1 + extra))
    }

    fn pt(&self, axis: usize, order: usize) -> RatMatrix {
        self.coeff_t
            .get(&(axis, order))
            .cloned()
            .unwrap_or_else(|| RatMatrix::zeros(self.n, self.m))
    }

    fn check_normal(&self, normal: &[Rational]) {
        assert_eq!(normal.len(), self.ell, "normal has wrong dimension");
    }

    /// `P_∂ = Σ_k n̂_k P_k(1)ᵀ`.
    pub fn p_boundary(&self, normal: &[Rational]) -> RatMatrix {
        self.check_normal(normal);
        let mut s = RatMatrix::zeros(self.n, self.m);
        for (k, nk) in normal.iter().enumerate() {
            if !nk.is_zero() {
                s = s.add(&self.pt(k + 1, 1).scale(nk));
            }
        }
        s
    }

    /// `W_i = [n̂_1 P_1(i)ᵀ … n̂_ℓ P_ℓ(i)ᵀ]`.
    pub fn w_block(&self, i: usize, normal: &[Rational]) -> RatMatrix {
        self.check_normal(normal);
        let mut out = RatMatrix::zeros(self.n, self.m * self.ell);
        for (k, nk) in normal.iter().enumerate() {
            out.set_block(0, k * self.m, &self.pt(k + 1, i).scale(nk));
        }
        out
    }

    /// `V_i`, the column-stacked counterpart of `W_i`.
    pub fn v_block(&self, i: usize, normal: &[Rational]) -> RatMatrix {
        self.check_normal(normal);
        let mut out = RatMatrix::zeros(self.n * self.ell, self.m);
        for (k, nk) in normal.iter().enumerate() {
            out.set_block(k * self.n, 0, &self.pt(k + 1, i).scale(nk));
        }
        out
    }

    /// `Λ_i = blockdiag(n̂_1 P_1(i)ᵀ, …, n̂_ℓ P_ℓ(i)ᵀ)`.
    pub fn lambda_block(&self, i: usize, normal: &[Rational]) -> RatMatrix {
        self.check_normal(normal);
        let mut out = RatMatrix::zeros(self.n * self.ell, self.m * self.ell);
        for (k, nk) in normal.iter().enumerate() {
            out.set_block(k * self.n, k * self.m, &self.pt(k + 1, i).scale(nk));
        }
        out
    }

    /// Assembled `Q_∂` for a concrete normal.
    pub fn assemble(&self, normal: &[Rational]) -> RatMatrix {
        assemble_with_signs(self, normal, |b| if b % 2 == 1 { -1 } else { 1 })
    }

    /// `Q_∂` contracted with each unit normal `e_k`, so that
    /// `Q_∂(n̂) = Σ_k n̂_k Q_k`.
    pub fn axis_matrices(&self) -> Vec<RatMatrix> {
        (0..self.ell)
            .map(|k| {
                let mut e = vec![Rational::zero(); self.ell];
                e[k] = Rational::one();
                self.assemble(&e)
            })
            .collect()
    }
}

/// Assembly with a caller-chosen sign per column block; the mutation suite
/// uses this to model dropped alternating signs.
pub fn assemble_with_signs(
    form: &BoundaryForm,
    normal: &[Rational],
    sign: impl Fn(usize) -> i64,
) -> RatMatrix {
    let (rows, cols) = form.shape();
    let mut q = RatMatrix::zeros(rows, cols);
    let big_n = form.order;
    let (n, m, ell) = (form.n, form.m, form.ell);
    let row_off = |a: usize| if a == 0 { 0 } else { n + (a - 1) * n * ell };
    let col_off = |b: usize| if b == 0 { 0 } else { m + (b - 1) * m * ell };
    for a in 0..big_n {
        for b in 0..big_n - a {
            let i = a + b + 1;
            let block = match (a, b) {
                (0, 0) => form.p_boundary(normal),
                (0, _) => form.w_block(i, normal),
                (_, 0) => form.v_block(i, normal),
                _ => form.lambda_block(i, normal),
            };
            let s = Rational::from_integer(sign(b).into());
            q.set_block(row_off(a), col_off(b), &block.scale(&s));
        }
    }
    q
}

/// Which end of an axis a face sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Lo,
    Hi,
}

/// One boundary face of an axis-aligned box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Zero-based axis index.
    pub axis: usize,
    pub side: Side,
    pub normal: Vec<Rational>,
}

/// Axis-aligned box `Π_k (lo_k, hi_k)`: an interval, rectangle or box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainSpec {
    lo: Vec<Rational>,
    hi: Vec<Rational>,
}

impl DomainSpec {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self, DiffOpError> {
        assert_eq!(lo.len(), hi.len(), "bound vectors differ in length");
        for (k, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if a >= b {
                return Err(DiffOpError::EmptyDomain(k));
            }
        }
        Ok(DomainSpec { lo, hi })
    }

    /// The unit interval, square, or cube.
    pub fn unit(ell: usize) -> Self {
        DomainSpec {
            lo: vec![Rational::zero(); ell],
            hi: vec![Rational::one(); ell],
        }
    }

    pub fn ell(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[Rational] {
        &self.lo
    }

    pub fn hi(&self) -> &[Rational] {
        &self.hi
    }

    /// Faces ordered by axis, low side first, with outward normals.
    pub fn faces(&self) -> Vec<Face> {
        let ell = self.ell();
        let mut out = Vec::with_capacity(2 * ell);
        for axis in 0..ell {
            for side in [Side::Lo, Side::Hi] {
                let mut normal = vec![Rational::zero(); ell];
                normal[axis] = match side {
                    Side::Lo => -Rational::one(),
                    Side::Hi => Rational::one(),
                };
                out.push(Face { axis, side, normal });
            }
        }
        out
    }

    fn check(&self, p: &Poly) -> Result<(), DiffOpError> {
        if p.nvars() < self.ell() {
            return Err(DiffOpError::TooFewCoords {
                vars: p.nvars(),
                ell: self.ell(),
            });
        }
        if (self.ell()..p.nvars()).any(|v| p.depends_on(v)) {
            return Err(DiffOpError::NotDistributed);
        }
        Ok(())
    }

    /// Exact integral over the box.
    pub fn integrate(&self, p: &Poly) -> Result<Rational, DiffOpError> {
        self.check(p)?;
        let mut q = p.clone();
        for k in 0..self.ell() {
            q = q.definite_integral(k, &self.lo[k], &self.hi[k]);
        }
        Ok(q.as_constant().expect("all distributed coordinates integrated"))
    }

    /// Exact integral over one face (a point value when `ℓ = 1`).
    pub fn integrate_face(&self, p: &Poly, face: &Face) -> Result<Rational, DiffOpError> {
        self.check(p)?;
        let at = match face.side {
            Side::Lo => &self.lo[face.axis],
            Side::Hi => &self.hi[face.axis],
        };
        let mut q = p.substitute(face.axis, at);
        for k in (0..self.ell()).filter(|&k| k != face.axis) {
            q = q.definite_integral(k, &self.lo[k], &self.hi[k]);
        }
        Ok(q.as_constant().expect("all distributed coordinates integrated"))
    }
}

fn dot(a: &[Poly], b: &[Poly]) -> Poly {
    let mut acc = Poly::zero(a[0].coords());
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = &acc + &(x * y);
        }
    }
    acc
}

/// `xᵀ Q y` for polynomial vectors.
fn bilinear(x: &[Poly], q: &RatMatrix, y: &[Poly]) -> Poly {
    let qy: Vec<Poly> = (0..q.rows())
        .map(|i| {
            let mut acc = Poly::zero(y[0].coords());
            for (j, yj) in y.iter().enumerate() {
                let c = q.get(i, j);
                if !c.is_zero() && !yj.is_zero() {
                    acc = &acc + &yj.scale(c);
                }
            }
            acc
        })
        .collect();
    dot(x, &qy)
}

/// `∫_Ω (vᵀ F w − wᵀ F* v) dx` with an explicitly supplied adjoint.
pub fn volume_term(
    d: &DiffOpMatrix,
    adjoint: &DiffOpMatrix,
    v: &[Poly],
    w: &[Poly],
    dom: &DomainSpec,
) -> Result<Rational, DiffOpError> {
    let fw = d.apply(w)?;
    let fsv = adjoint.apply(v)?;
    if v.len() != d.m() {
        return Err(DiffOpError::Length {
            expected: d.m(),
            got: v.len(),
        });
    }
    dom.integrate(&(&dot(v, &fw) - &dot(w, &fsv)))
}

/// `∮ 𝓑(w)ᵀ Q_∂ 𝓑(v) ds` with `Q_∂` supplied per face normal.
pub fn boundary_term(
    d: &DiffOpMatrix,
    q: impl Fn(&[Rational]) -> RatMatrix,
    v: &[Poly],
    w: &[Poly],
    dom: &DomainSpec,
) -> Result<Rational, DiffOpError> {
    let bw = jet(w, d).flatten();
    let bv = jet(v, d).flatten();
    let mut total = Rational::zero();
    for face in dom.faces() {
        let qn = q(&face.normal);
        total += dom.integrate_face(&bilinear(&bw, &qn, &bv), &face)?;
    }
    Ok(total)
}

/// The boundary term evaluated straight from the triple sum
/// `Σ_k Σ_i Σ_{j=1..i} (−1)^{j−1} ∮ (∂_k^{i−j} w)ᵀ P_k(i)ᵀ n̂_k ∂_k^{j−1} v ds`,
/// bypassing the block matrix.
pub fn boundary_term_direct(
    d: &DiffOpMatrix,
    v: &[Poly],
    w: &[Poly],
    dom: &DomainSpec,
) -> Result<Rational, DiffOpError> {
    let mut total = Rational::zero();
    for face in dom.faces() {
        let k = face.axis + 1;
        let nk = &face.normal[face.axis];
        let mut integrand = Poly::zero(w[0].coords());
        for (&(axis, i), c) in d.terms() {
            if axis != k {
                continue;
            }
            let ct = c.transpose().scale(nk);
            for j in 1..=i {
                let dw: Vec<Poly> = w.iter().map(|p| p.differentiate_n(k - 1, i - j)).collect();
                let dv: Vec<Poly> = v.iter().map(|p| p.differentiate_n(k - 1, j - 1)).collect();
                let t = bilinear(&dw, &ct, &dv);
                integrand = if j % 2 == 1 {
                    &integrand + &t
                } else {
                    &integrand - &t
                };
            }
        }
        total += dom.integrate_face(&integrand, &face)?;
    }
    Ok(total)
}

/// Residual of the integration-by-parts identity; exactly zero for every
/// operator in the class.
pub fn ibp_residual(
    d: &DiffOpMatrix,
    v: &[Poly],
    w: &[Poly],
    dom: &DomainSpec,
) -> Result<Rational, DiffOpError> {
    let form = d.boundary_form();
    let lhs = volume_term(d, &d.formal_adjoint(), v, w, dom)?;
    let rhs = boundary_term(d, |n| form.assemble(n), v, w, dom)?;
    Ok(lhs - rhs)
}
