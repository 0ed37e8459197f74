use num_traits::One;

use crate::diff_op::{assemble_with_signs, DiffOpError, DiffOpMatrix};
use crate::matrix::RatMatrix;
use crate::model::KinematicModel;
use crate::poly::Poly;
use crate::rational::Rational;

use super::residual_with;

/// Corruption applied to one ingredient of the integration by parts
/// identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationKind {
    /// `P_∂ → -P_∂` (whole boundary matrix negated).
    BoundarySign,
    /// `(-1)^b` column-block signs replaced by `+1`.
    DroppedAlternatingSign,
    /// `Q_∂ → Q_∂ᵀ`.
    TransposedBoundary,
    /// Sign of `P_1(1)` flipped in `F` only; adjoint and boundary untouched.
    CoefficientSignInF,
    /// Adjoint built without the `(-1)^i` factors.
    AdjointSignDropped,
    /// Adjoint built with `P_0` instead of `P_0ᵀ`.
    UntransposedP0,
    /// Boundary evaluated with the inward normal.
    InwardNormal,
    /// `V_2` block of `Q_∂` zeroed.
    ZeroedV2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mutation {
    pub name: &'static str,
    pub subject: &'static str,
    pub kind: MutationKind,
}

pub fn mutation_catalogue() -> Vec<Mutation> {
    use MutationKind::*;
    let m = |name, subject, kind| Mutation { name, subject, kind };
    vec![
        m("boundary-sign", "timoshenko", BoundarySign),
        m("dropped-alternating-sign", "rayleigh_beam", DroppedAlternatingSign),
        m("transposed-boundary", "kirchhoff_rayleigh", TransposedBoundary),
        m("coefficient-sign-in-f", "reddy_plate", CoefficientSignInF),
        m("adjoint-sign-dropped", "truss", AdjointSignDropped),
        m("untransposed-p0", "timoshenko", UntransposedP0),
        m("inward-normal", "mindlin_plate", InwardNormal),
        m("zeroed-v2", "euler_bernoulli", ZeroedV2),
    ]
}

fn unsigned_adjoint(f: &DiffOpMatrix) -> DiffOpMatrix {
    DiffOpMatrix::new(
        f.n(),
        f.m(),
        f.ell(),
        f.p0().transpose(),
        f.terms().iter().map(|(&k, c)| (k, c.transpose())),
    )
    .expect("transposed shapes")
}

impl Mutation {
    /// Volume minus boundary side of the identity under this corruption.
    pub fn residual(&self, m: &KinematicModel, v: &[Poly], w: &[Poly]) -> Result<Rational, DiffOpError> {
        use MutationKind::*;
        let f = &m.f;
        let adj = f.formal_adjoint();
        let form = f.boundary_form();
        let dom = &m.domain;
        let neg = |n: &[Rational]| -> Vec<Rational> { n.iter().map(|x| -x.clone()).collect() };
        match self.kind {
            BoundarySign => residual_with(f, &adj, f, |n| form.assemble(n).scale(&-Rational::one()), v, w, dom),
            DroppedAlternatingSign => {
                residual_with(f, &adj, f, |n| assemble_with_signs(&form, n, |_| 1), v, w, dom)
            }
            TransposedBoundary => residual_with(f, &adj, f, |n| form.assemble(n).transpose(), v, w, dom),
            CoefficientSignInF => {
                let c = f.coefficient(1, 1).cloned().unwrap_or_else(|| RatMatrix::zeros(f.m(), f.n()));
                let bad = f.with_coefficient(1, 1, c.scale(&-Rational::one()));
                residual_with(&bad, &adj, f, |n| form.assemble(n), v, w, dom)
            }
            AdjointSignDropped => {
                residual_with(f, &unsigned_adjoint(f), f, |n| form.assemble(n), v, w, dom)
            }
            UntransposedP0 => {
                let bad = DiffOpMatrix::new(
                    adj.m(),
                    adj.n(),
                    adj.ell(),
                    f.p0().clone(),
                    adj.terms().iter().map(|(&k, c)| (k, c.clone())),
                )?;
                residual_with(f, &bad, f, |n| form.assemble(n), v, w, dom)
            }
            InwardNormal => residual_with(f, &adj, f, |n| form.assemble(&neg(n)), v, w, dom),
            ZeroedV2 => {
                let (rows, _) = form.shape();
                let (n, mm, ell) = (f.n(), f.m(), f.ell());
                residual_with(
                    f,
                    &adj,
                    f,
                    |nrm| {
                        let mut q = form.assemble(nrm);
                        if rows > n {
                            q.set_block(n, 0, &RatMatrix::zeros(n * ell, mm));
                        }
                        q
                    },
                    v,
                    w,
                    dom,
                )
            }
        }
    }
}
