//! Declarative kinematic models: data types, cross-section integration,
//! constitutive presets, the model-file format, builtin models and
//! structural validation.

pub mod builtins;
pub mod expr;
pub mod parse;
pub mod validate;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::diff_op::{DiffOpMatrix, DomainSpec};
use crate::matrix::RatMatrix;
use crate::poly::{CoordSet, Poly, PolyMatrix};
use crate::rational::{fmt_rational, int, Rational};

pub use builtins::{builtin_model, builtin_names, default_params, physical_params};
pub use expr::ExprError;
pub use parse::{parse_model, to_model_text};
pub use validate::{validate_model, CheckStatus, ValidationCheck, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Expr { line: usize, source: ExprError },
    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),
    #[error("builtin `{model}`: {message}")]
    Parameter { model: String, message: String },
    #[error("model `{model}` failed validation:\n{report}")]
    Invalid { model: String, report: String },
    #[error("section: {0}")]
    Section(String),
}

/// Cross-section over the complementary coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Section {
    /// No complementary coordinates (three-dimensional continua).
    None,
    /// Thickness `h` centred on the mid-surface.
    Interval { h: Rational },
    /// Centred `b × h` rectangle; `b` along the first complementary axis.
    Rectangle { b: Rational, h: Rational },
    /// Centred disc of radius `r`.
    Circle { r: Rational },
    /// Symmetric section known only through its area and, optionally, the
    /// second moment about the first complementary axis.
    Generic {
        area: Rational,
        second_moment: Option<Rational>,
    },
}

fn double_factorial(k: i64) -> Rational {
    let mut r = Rational::one();
    let mut j = k;
    while j > 1 {
        r *= int(j);
        j -= 2;
    }
    r
}

impl Section {
    /// Number of complementary coordinates the section spans.
    pub fn dims(&self) -> usize {
        match self {
            Section::None => 0,
            Section::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Power of π carried by every integral over the section.
    pub fn pi_pow(&self) -> i32 {
        matches!(self, Section::Circle { .. }) as i32
    }

    /// `∫ Π_j y_j^{e_j}` for exponents over the section's coordinates, as
    /// the rational coefficient of `π^pi_pow`.
    pub fn monomial_integral(&self, exps: &[u32]) -> Result<Rational, ModelError> {
        assert_eq!(exps.len(), self.dims(), "exponent count differs from section dimension");
        let interval = |len: &Rational, e: u32| {
            let half = len / int(2);
            let hi = crate::poly::rational_pow(&half, e + 1);
            let lo = crate::poly::rational_pow(&-half, e + 1);
            (hi - lo) / int((e + 1).into())
        };
        Ok(match self {
            Section::None => Rational::one(),
            Section::Interval { h } => interval(h, exps[0]),
            Section::Rectangle { b, h } => interval(b, exps[0]) * interval(h, exps[1]),
            Section::Circle { r } => {
                let (a, b) = (exps[0] as i64, exps[1] as i64);
                if a % 2 == 1 || b % 2 == 1 {
                    return Ok(Rational::zero());
                }
                let num = int(2) * double_factorial(a - 1) * double_factorial(b - 1);
                let den = double_factorial(a + b) * int(a + b + 2);
                num / den * crate::poly::rational_pow(r, (a + b + 2) as u32)
            }
            Section::Generic {
                area,
                second_moment,
            } => match (exps[0], exps[1]) {
                (a, b) if a % 2 == 1 || b % 2 == 1 => Rational::zero(),
                (0, 0) => area.clone(),
                (0, 2) => second_moment.clone().ok_or_else(|| {
                    ModelError::Section(
                        "second moment requested but the generic section has no I".into(),
                    )
                })?,
                (a, b) => {
                    return Err(ModelError::Section(format!(
                        "unsupported section/exponent combination: generic section cannot \
                         integrate y1^{a} y2^{b}"
                    )))
                }
            },
        })
    }

    /// Integrates a polynomial in which only the variables `vars` (the
    /// complementary coordinates, in section order) appear.
    pub fn integrate(&self, p: &Poly, vars: &[usize]) -> Result<Rational, ModelError> {
        assert_eq!(vars.len(), self.dims(), "section variable count mismatch");
        let mut total = Rational::zero();
        for (e, c) in p.terms() {
            for (i, &k) in e.iter().enumerate() {
                if k > 0 && !vars.contains(&i) {
                    return Err(ModelError::Section(format!(
                        "integrand depends on `{}`, which is not a section coordinate",
                        p.coords().name(i)
                    )));
                }
            }
            let exps: Vec<u32> = vars.iter().map(|&v| e[v]).collect();
            total += c * self.monomial_integral(&exps)?;
        }
        Ok(total)
    }

    pub fn to_text(&self) -> String {
        match self {
            Section::None => "none".into(),
            Section::Interval { h } => format!("interval({})", fmt_rational(h)),
            Section::Rectangle { b, h } => {
                format!("rectangle({}, {})", fmt_rational(b), fmt_rational(h))
            }
            Section::Circle { r } => format!("circle({})", fmt_rational(r)),
            Section::Generic {
                area,
                second_moment: None,
            } => format!("generic({})", fmt_rational(area)),
            Section::Generic {
                area,
                second_moment: Some(i),
            } => format!("generic({}, {})", fmt_rational(area), fmt_rational(i)),
        }
    }
}

/// Named constitutive matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstitutivePreset {
    ScalarE,
    ShearG,
    StringTension,
    PlaneStress,
    Iso3d,
    ReddyBlock,
    MindlinBlock,
}

impl ConstitutivePreset {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "scalar" => Self::ScalarE,
            "shear" => Self::ShearG,
            "string_tension" => Self::StringTension,
            "plane_stress" => Self::PlaneStress,
            "iso3d" => Self::Iso3d,
            "reddy_block" => Self::ReddyBlock,
            "mindlin_block" => Self::MindlinBlock,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Self::ScalarE | Self::ShearG => 1,
            Self::StringTension | Self::PlaneStress | Self::Iso3d => 2,
            Self::ReddyBlock | Self::MindlinBlock => 3,
        }
    }

    /// The constitutive matrix for the given arguments.
    pub fn matrix(self, args: &[Rational]) -> RatMatrix {
        assert_eq!(args.len(), self.arity(), "preset argument count");
        let plane = |e: &Rational, nu: &Rational| {
            let s = e / (Rational::one() - nu * nu);
            let z = Rational::zero();
            RatMatrix::from_rows(vec![
                vec![s.clone(), &s * nu, z.clone()],
                vec![&s * nu, s.clone(), z.clone()],
                vec![z.clone(), z, &s * (Rational::one() - nu) / int(2)],
            ])
        };
        match self {
            Self::ScalarE => RatMatrix::diag(&args[..1]),
            Self::ShearG => RatMatrix::diag(&[args[0].clone(), args[0].clone()]),
            Self::StringTension => RatMatrix::diag(&[&args[0] / &args[1]]),
            Self::PlaneStress => plane(&args[0], &args[1]),
            Self::Iso3d => {
                let (e, nu) = (&args[0], &args[1]);
                let mu = e / (int(2) * (Rational::one() + nu));
                let lam = nu * e / ((Rational::one() + nu) * (Rational::one() - int(2) * nu));
                let mut c = RatMatrix::zeros(6, 6);
                for i in 0..3 {
                    for j in 0..3 {
                        c.set(i, j, lam.clone());
                    }
                    c.set(i, i, &lam + int(2) * &mu);
                    c.set(i + 3, i + 3, mu.clone());
                }
                c
            }
            Self::ReddyBlock | Self::MindlinBlock => {
                let mut c = RatMatrix::zeros(5, 5);
                c.set_block(0, 0, &plane(&args[0], &args[1]));
                c.set(3, 3, args[2].clone());
                c.set(4, 4, args[2].clone());
                c
            }
        }
    }
}

/// A derived unknown: `r_target = ∂_axis^order r_source`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub target: usize,
    pub axis: usize,
    pub order: usize,
    pub source: usize,
}

/// Matrix of operator entries with polynomial coefficients; entry key
/// `(0, 0)` is the multiplication part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpPolyMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<expr::OpTerms>,
}

impl OpPolyMatrix {
    pub fn get(&self, i: usize, j: usize) -> &expr::OpTerms {
        &self.entries[i * self.cols + j]
    }

    pub fn apply(&self, r: &[Poly]) -> Vec<Poly> {
        (0..self.rows)
            .map(|i| {
                let mut acc = Poly::zero(r[0].coords());
                for (j, rj) in r.iter().enumerate() {
                    for (&(k, o), c) in self.get(i, j) {
                        let d = if k == 0 {
                            rj.clone()
                        } else {
                            rj.differentiate_n(k - 1, o)
                        };
                        acc = &acc + &(c * &d);
                    }
                }
                acc
            })
            .collect()
    }
}

/// How the strain declared by `λ2 𝓕 r` is checked against the
/// displacement field.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct StrainSpec {
    /// Voigt components (1..=6) that `λ2 𝓕 r` represents, in row order.
    pub voigt: Vec<usize>,
    /// Unknowns that are derivatives of other unknowns.
    pub constraints: Vec<Constraint>,
    /// Displacement map used for strains when it differs from `λ1`, for
    /// models whose inertia neglects part of the kinematics.
    pub kinematics: Option<OpPolyMatrix>,
}

/// Fully resolved declarative model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KinematicModel {
    pub name: String,
    /// The three Cartesian coordinates.
    pub coords: Arc<CoordSet>,
    /// Number of leading coordinates that are distributed (ℓ).
    pub ell: usize,
    pub domain: DomainSpec,
    pub section: Section,
    pub params: BTreeMap<String, Rational>,
    pub unknowns: Vec<String>,
    pub lambda1: PolyMatrix,
    pub lambda2: PolyMatrix,
    pub f: DiffOpMatrix,
    pub c: RatMatrix,
    pub rho: Rational,
    pub bd: Option<RatMatrix>,
    pub strain: StrainSpec,
}

impl KinematicModel {
    /// Number of generalized displacements.
    pub fn n(&self) -> usize {
        self.f.n()
    }

    /// Number of generalized strains.
    pub fn m(&self) -> usize {
        self.f.m()
    }

    /// Number of stress/strain components in the constitutive law.
    pub fn d(&self) -> usize {
        self.lambda2.rows()
    }

    pub fn order(&self) -> usize {
        self.f.order()
    }

    /// Indices of the complementary coordinates.
    pub fn complementary(&self) -> Vec<usize> {
        (self.ell..self.coords.len()).collect()
    }

    /// Integral over the cross-section, as the coefficient of
    /// `π^section.pi_pow()`.
    pub fn section_integral(&self, p: &Poly) -> Result<Rational, ModelError> {
        self.section.integrate(p, &self.complementary())
    }

    /// Generalized stress/strain labels `eps1..epsm`.
    pub fn strain_labels(&self) -> Vec<String> {
        (1..=self.m()).map(|i| format!("eps{i}")).collect()
    }
}

/// Standard Cartesian coordinate names.
pub fn cartesian() -> Arc<CoordSet> {
    CoordSet::new(&["z1", "z2", "z3"])
}
