//! Compilation of a kinematic model into its port-Hamiltonian form: exact
//! mass and stiffness matrices, the skew operator block, boundary ports and
//! the Lagrangian (Legendre) alternative.

pub mod export;

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::diff_op::{BoundaryForm, DiffOpMatrix, DomainSpec};
use crate::matrix::{ExactMatrix, RatMatrix};
use crate::model::{KinematicModel, ModelError, Section};
use crate::poly::{CoordSet, Poly};
use crate::rational::{fmt_rational, PiRational, Rational};

pub use export::{export_csv, export_json, ExportDocument};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{which} matrix is not symmetric")]
    NotSymmetric { which: &'static str },
    #[error("{which} matrix is not positive definite: {witness}")]
    NotPositive { which: &'static str, witness: String },
    #[error("boundary normal {0}")]
    Normal(String),
}

/// `∫ y^i` over the section along its last coordinate (the thickness
/// direction), as a π-tagged rational.
pub fn section_moment(section: &Section, i: u32) -> Result<PiRational, ModelError> {
    let exps: Vec<u32> = match section.dims() {
        0 => Vec::new(),
        1 => vec![i],
        _ => vec![0, i],
    };
    if section.dims() == 0 && i > 0 {
        return Err(ModelError::Section(
            "unsupported section/exponent combination: a section of type none has no thickness coordinate"
                .into(),
        ));
    }
    Ok(PiRational::new(section.monomial_integral(&exps)?, section.pi_pow()))
}

fn positivity(which: &'static str, q: &RatMatrix) -> Result<(), PhsError> {
    if !q.is_symmetric() {
        return Err(PhsError::NotSymmetric { which });
    }
    if let Err(w) = q.positive_definite() {
        let mut witness = format!(
            "leading principal minor of order {} is {}",
            w.order,
            fmt_rational(&w.value)
        );
        if let Some(v) = q.null_vector() {
            let v: Vec<String> = v.iter().map(fmt_rational).collect();
            witness.push_str(&format!("; null vector [{}]", v.join(", ")));
        }
        return Err(PhsError::NotPositive { which, witness });
    }
    Ok(())
}

fn integrate_entries(
    m: &KinematicModel,
    rows: usize,
    cols: usize,
    entry: impl Fn(usize, usize) -> Poly,
) -> Result<RatMatrix, ModelError> {
    let mut out = RatMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in i..cols {
            let v = m.section_integral(&entry(i, j))?;
            out.set(i, j, v.clone());
            if i != j {
                out.set(j, i, v);
            }
        }
    }
    Ok(out)
}

/// `ρ ∫ λ₁ᵀ λ₁` over the cross-section, without the positivity check.
pub fn mass_matrix_unchecked(m: &KinematicModel) -> Result<ExactMatrix, ModelError> {
    let l = &m.lambda1;
    let q = integrate_entries(m, m.n(), m.n(), |i, j| {
        let mut acc = Poly::zero(&m.coords);
        for r in 0..l.rows() {
            acc = &acc + &(l.get(r, i) * l.get(r, j));
        }
        acc
    })?;
    Ok(ExactMatrix {
        pi_pow: m.section.pi_pow(),
        q: q.scale(&m.rho),
    })
}

/// `∫ λ₂ᵀ C λ₂` over the cross-section, without the positivity check.
pub fn stiffness_matrix_unchecked(m: &KinematicModel) -> Result<ExactMatrix, ModelError> {
    let l = &m.lambda2;
    let q = integrate_entries(m, m.m(), m.m(), |i, j| {
        let mut acc = Poly::zero(&m.coords);
        for a in 0..l.rows() {
            for b in 0..l.rows() {
                let c = m.c.get(a, b);
                if c.is_zero() {
                    continue;
                }
                acc = &acc + &(l.get(a, i) * l.get(b, j)).scale(c);
            }
        }
        acc
    })?;
    Ok(ExactMatrix {
        pi_pow: m.section.pi_pow(),
        q,
    })
}

/// Mass matrix; fails if it is not symmetric positive definite.
pub fn mass_matrix(m: &KinematicModel) -> Result<ExactMatrix, PhsError> {
    let mm = mass_matrix_unchecked(m)?;
    positivity("mass", &mm.q)?;
    Ok(mm)
}

/// Stiffness matrix; fails if it is not symmetric positive definite.
pub fn stiffness_matrix(m: &KinematicModel) -> Result<ExactMatrix, PhsError> {
    let k = stiffness_matrix_unchecked(m)?;
    positivity("stiffness", &k.q)?;
    Ok(k)
}

/// The operator block `J = [[0, -F*], [F, 0]]` acting on `(e_p, e_ε)`.
pub fn operator_block(f: &DiffOpMatrix) -> DiffOpMatrix {
    let (n, m) = (f.n(), f.m());
    let fs = f.formal_adjoint();
    let minus = -Rational::one();
    let place = |top: &RatMatrix, bottom: &RatMatrix| {
        let mut j = RatMatrix::zeros(n + m, n + m);
        j.set_block(0, n, &top.scale(&minus));
        j.set_block(n, 0, bottom);
        j
    };
    let zeros_t = RatMatrix::zeros(n, m);
    let zeros_b = RatMatrix::zeros(m, n);
    let mut keys: Vec<(usize, usize)> = f.terms().keys().copied().collect();
    keys.extend(fs.terms().keys().copied());
    keys.sort();
    keys.dedup();
    let terms: BTreeMap<(usize, usize), RatMatrix> = keys
        .into_iter()
        .map(|k| {
            let top = fs.coefficient(k.0, k.1).unwrap_or(&zeros_t);
            let bottom = f.coefficient(k.0, k.1).unwrap_or(&zeros_b);
            (k, place(top, bottom))
        })
        .collect();
    DiffOpMatrix::new(n + m, n + m, f.ell(), place(fs.p0(), f.p0()), terms)
        .expect("block operator shapes are consistent")
}

/// Names for the energy variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateLabels {
    /// `p1..pn`, each paired with the unknown it is conjugate to.
    pub momenta: Vec<(String, String)>,
    pub strains: Vec<String>,
}

/// Compiled port-Hamiltonian system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PHSystem {
    pub model: KinematicModel,
    pub mass: ExactMatrix,
    pub mass_inverse: ExactMatrix,
    pub stiffness: ExactMatrix,
    pub f: DiffOpMatrix,
    pub f_star: DiffOpMatrix,
    pub j: DiffOpMatrix,
    pub bd: Option<RatMatrix>,
    pub boundary: BoundaryForm,
    pub labels: StateLabels,
}

/// Runs the assembly: `M`, `K`, `F*`, the block operator and the boundary
/// form. Co-energies are `e_p = M⁻¹ p` and `e_ε = K ε`.
pub fn assemble_phs(m: &KinematicModel) -> Result<PHSystem, PhsError> {
    let mass = mass_matrix(m)?;
    let stiffness = stiffness_matrix(m)?;
    let mass_inverse = mass.inverse().expect("positive definite matrices are invertible");
    let labels = StateLabels {
        momenta: m
            .unknowns
            .iter()
            .enumerate()
            .map(|(i, u)| (format!("p{}", i + 1), u.clone()))
            .collect(),
        strains: m.strain_labels(),
    };
    Ok(PHSystem {
        model: m.clone(),
        mass,
        mass_inverse,
        stiffness,
        f: m.f.clone(),
        f_star: m.f.formal_adjoint(),
        j: operator_block(&m.f),
        bd: m.bd.clone(),
        boundary: m.f.boundary_form(),
        labels,
    })
}

/// Boundary port maps for one face normal: `u_∂ = input · 𝓑(e_ε)` and
/// `y_∂ = output · 𝓑(e_p)`, so that the boundary power is `y_∂ᵀ u_∂`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryPorts {
    pub normal: Vec<Rational>,
    pub order: usize,
    pub input: RatMatrix,
    pub output: RatMatrix,
    /// Jet components of `e_ε` that `input` multiplies.
    pub input_labels: Vec<String>,
    /// Jet components of `e_p` collected in `y_∂`.
    pub output_labels: Vec<String>,
}

fn jet_labels(base: &[String], order: usize, ell: usize) -> Vec<String> {
    let mut out: Vec<String> = base.to_vec();
    for j in 1..order {
        for k in 1..=ell {
            for b in base {
                out.push(if j == 1 {
                    format!("d{k} {b}")
                } else {
                    format!("d{k}^{j} {b}")
                });
            }
        }
    }
    out
}

/// Port maps at a face with the given outward normal. For `ℓ ≥ 2` only
/// axis-aligned unit normals are accepted.
pub fn boundary_port_map(s: &PHSystem, normal: &[Rational]) -> Result<BoundaryPorts, PhsError> {
    let ell = s.f.ell();
    if normal.len() != ell {
        return Err(PhsError::Normal(format!(
            "has {} components, operator acts on {ell} axes",
            normal.len()
        )));
    }
    let one = Rational::one();
    let nonzero: Vec<&Rational> = normal.iter().filter(|v| !v.is_zero()).collect();
    if nonzero.len() != 1 || (nonzero[0] != &one && nonzero[0] != &-one.clone()) {
        return Err(PhsError::Normal(
            "must be an axis-aligned unit vector (each face of a box domain)".into(),
        ));
    }
    let order = s.boundary.order();
    let ep: Vec<String> = (1..=s.f.n()).map(|i| format!("e_p{i}")).collect();
    let ee: Vec<String> = (1..=s.f.m()).map(|i| format!("e_eps{i}")).collect();
    let input_labels = jet_labels(&ee, order, ell);
    let output_labels = jet_labels(&ep, order, ell);
    let input = if order == 1 {
        s.boundary.p_boundary(normal)
    } else {
        s.boundary.assemble(normal)
    };
    Ok(BoundaryPorts {
        normal: normal.to_vec(),
        order,
        output: RatMatrix::identity(output_labels.len()),
        input,
        input_labels,
        output_labels,
    })
}

/// Polynomial vector times `π^pi_pow`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiPolys {
    pub pi_pow: i32,
    pub polys: Vec<Poly>,
}

/// Second-order (Lagrangian) form: `d/dt [r; p] = J0 [e_r; M⁻¹ p]` with
/// `e_r = F*(K F r)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagrangianFormSystem {
    pub mass: ExactMatrix,
    pub stiffness: ExactMatrix,
    pub f: DiffOpMatrix,
    pub f_star: DiffOpMatrix,
    /// `[[0, -1_n], [1_n, 0]]`.
    pub j0: RatMatrix,
}

impl LagrangianFormSystem {
    /// Variational derivative of the potential energy with respect to `r`.
    pub fn e_r(&self, r: &[Poly]) -> Result<PiPolys, crate::diff_op::DiffOpError> {
        let fr = self.f.apply(r)?;
        let k = &self.stiffness.q;
        let kfr: Vec<Poly> = (0..k.rows())
            .map(|i| {
                let mut acc = Poly::zero(fr[0].coords());
                for (j, p) in fr.iter().enumerate() {
                    acc = &acc + &p.scale(k.get(i, j));
                }
                acc
            })
            .collect();
        Ok(PiPolys {
            pi_pow: self.stiffness.pi_pow,
            polys: self.f_star.apply(&kfr)?,
        })
    }
}

pub fn lagrangian_form(s: &PHSystem) -> LagrangianFormSystem {
    let n = s.f.n();
    let mut j0 = RatMatrix::zeros(2 * n, 2 * n);
    let one = Rational::one();
    for i in 0..n {
        j0.set(i, n + i, -one.clone());
        j0.set(n + i, i, one.clone());
    }
    LagrangianFormSystem {
        mass: s.mass.clone(),
        stiffness: s.stiffness.clone(),
        f: s.f.clone(),
        f_star: s.f_star.clone(),
        j0,
    }
}

fn quadratic(q: &RatMatrix, x: &[Poly]) -> Poly {
    let mut acc = Poly::zero(x[0].coords());
    for i in 0..q.rows() {
        for j in 0..q.cols() {
            let c = q.get(i, j);
            if !c.is_zero() {
                acc = &acc + &(&x[i] * &x[j]).scale(c);
            }
        }
    }
    acc
}

/// Kinetic and potential parts of `H = ½∫ pᵀM⁻¹p + εᵀKε` for polynomial
/// energy fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HamiltonianParts {
    pub kinetic: PiRational,
    pub potential: PiRational,
}

impl HamiltonianParts {
    pub fn to_f64(&self) -> f64 {
        self.kinetic.to_f64() + self.potential.to_f64()
    }
}

impl PHSystem {
    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn m(&self) -> usize {
        self.f.m()
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.model.domain
    }

    pub fn coords(&self) -> &std::sync::Arc<CoordSet> {
        &self.model.coords
    }

    /// Pointwise Hamiltonian density `½ pᵀM⁻¹p + ½ εᵀKε`.
    pub fn hamiltonian_density(&self, p: &[f64], eps: &[f64]) -> f64 {
        let mi = self.mass_inverse.to_f64_rows();
        let k = self.stiffness.to_f64_rows();
        let quad = |a: &[Vec<f64>], x: &[f64]| -> f64 {
            a.iter()
                .enumerate()
                .map(|(i, row)| x[i] * row.iter().zip(x).map(|(c, y)| c * y).sum::<f64>())
                .sum()
        };
        0.5 * (quad(&mi, p) + quad(&k, eps))
    }

    /// Exact Hamiltonian of polynomial energy fields over the domain.
    pub fn hamiltonian(&self, p: &[Poly], eps: &[Poly]) -> Result<HamiltonianParts, crate::diff_op::DiffOpError> {
        let half = crate::rational::rat(1, 2);
        let dom = self.domain();
        Ok(HamiltonianParts {
            kinetic: PiRational::new(
                dom.integrate(&quadratic(&self.mass_inverse.q, p))? * &half,
                self.mass_inverse.pi_pow,
            ),
            potential: PiRational::new(
                dom.integrate(&quadratic(&self.stiffness.q, eps))? * &half,
                self.stiffness.pi_pow,
            ),
        })
    }
}

#[cfg(test)]
mod tests;
