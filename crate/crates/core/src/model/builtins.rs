//! The builtin model zoo. Each builtin is a model-file template; parameters
//! are written into its `[params]` block and the text goes through the
//! ordinary parser, so builtins and files share one code path.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{parse_model, validate_model, KinematicModel, ModelError};
use crate::rational::{fmt_rational, int, rat, Rational};

#[derive(Clone, Copy)]
enum Kind {
    Required,
    /// Optional length with default 1.
    Length,
    /// Poisson ratio, restricted to (-1, 1/2).
    Poisson,
}

struct Template {
    name: &'static str,
    params: &'static [(&'static str, Kind)],
    /// Lines appended to `[params]` after the user values.
    derived: &'static [&'static str],
    body: &'static str,
}

use Kind::{Length, Poisson, Required};

const TEMPLATES: &[Template] = &[
    Template {
        name: "truss",
        params: &[("E", Required), ("rho", Required), ("b", Required), ("h", Required), ("L", Length)],
        derived: &[],
        body: "\
[coords]
distributed = z1
[domain]
z1 = 0, L
[section]
rectangle(b, h)
[unknowns]
u1
[lambda1]
1
0
0
[lambda2]
1
[F]
d1
[C]
scalar(E)
[Bd]
1
[strain]
voigt = 1
",
    },
    Template {
        name: "elasticity2d",
        params: &[
            ("E", Required),
            ("nu", Poisson),
            ("rho", Required),
            ("h", Required),
            ("Lx", Length),
            ("Ly", Length),
        ],
        derived: &[],
        body: "\
[coords]
distributed = z1 z2
[domain]
z1 = 0, Lx
z2 = 0, Ly
[section]
interval(h)
[unknowns]
u1 u2
[lambda1]
1, 0
0, 1
0, 0
[lambda2]
1, 0, 0
0, 1, 0
0, 0, 1
[F]
d1, 0
0, d2
d2, d1
[C]
plane_stress(E, nu)
[Bd]
1, 0
0, 1
[strain]
voigt = 1 2 4
",
    },
    Template {
        name: "elasticity3d",
        params: &[
            ("E", Required),
            ("nu", Poisson),
            ("rho", Required),
            ("Lx", Length),
            ("Ly", Length),
            ("Lz", Length),
        ],
        derived: &[],
        body: "\
[coords]
distributed = z1 z2 z3
[domain]
z1 = 0, Lx
z2 = 0, Ly
z3 = 0, Lz
[section]
none
[unknowns]
u1 u2 u3
[lambda1]
1, 0, 0
0, 1, 0
0, 0, 1
[lambda2]
1, 0, 0, 0, 0, 0
0, 1, 0, 0, 0, 0
0, 0, 1, 0, 0, 0
0, 0, 0, 1, 0, 0
0, 0, 0, 0, 1, 0
0, 0, 0, 0, 0, 1
[F]
d1, 0, 0
0, d2, 0
0, 0, d3
d2, d1, 0
d3, 0, d1
0, d3, d2
[C]
iso3d(E, nu)
[Bd]
1, 0, 0
0, 1, 0
0, 0, 1
[strain]
voigt = 1 2 3 4 5 6
",
    },
    Template {
        name: "mindlin_plate",
        params: &[
            ("E", Required),
            ("nu", Poisson),
            ("G", Required),
            ("rho", Required),
            ("h", Required),
            ("Lx", Length),
            ("Ly", Length),
        ],
        derived: &[],
        body: "\
[coords]
distributed = z1 z2
[domain]
z1 = 0, Lx
z2 = 0, Ly
[section]
interval(h)
[unknowns]
psi1 psi2 w
[lambda1]
-z3, 0, 0
0, -z3, 0
0, 0, 1
[lambda2]
-z3, 0, 0, 0, 0
0, -z3, 0, 0, 0
0, 0, -z3, 0, 0
0, 0, 0, 1, 0
0, 0, 0, 0, 1
[F]
d1, 0, 0
0, d2, 0
d2, d1, 0
-1, 0, d1
0, -1, d2
[C]
mindlin_block(E, nu, G)
[Bd]
0
0
1
[strain]
voigt = 1 2 4 5 6
",
    },
    Template {
        name: "string",
        params: &[("T", Required), ("rho", Required), ("A", Required), ("L", Length)],
        derived: &[],
        body: "\
[coords]
distributed = z1
[domain]
z1 = 0, L
[section]
generic(A)
[unknowns]
w
[lambda1]
0
0
1
[lambda2]
1
[F]
d1
[C]
string_tension(T, A)
[Bd]
1
[strain]
voigt = 5
",
    },
    Template {
        name: "torsion",
        params: &[("G", Required), ("R", Required), ("rho", Required), ("L", Length)],
        derived: &[],
        body: "\
[coords]
distributed = z1
[domain]
z1 = 0, L
[section]
circle(R)
[unknowns]
theta
[lambda1]
0
z3
-z2
[lambda2]
z3
-z2
[F]
d1
[C]
shear(G)
[Bd]
1
[strain]
voigt = 4 5
",
    },
    Template {
        name: "reddy_beam",
        params: &[
            ("E", Required),
            ("G", Required),
            ("rho", Required),
            ("b", Required),
            ("h", Required),
            ("L", Length),
        ],
        derived: &["alpha = 4/(3*h^2)"],
        body: "\
[coords]
distributed = z1
[domain]
z1 = 0, L
[section]
rectangle(b, h)
[unknowns]
psi w theta
[lambda1]
-(z3 - alpha*z3^3), 0, -alpha*z3^3
0, 0, 0
0, 1, 0
[lambda2]
-(z3 - alpha*z3^3), 0, -alpha*z3^3
0, 1 - 3*alpha*z3^2, 0
[F]
d1, 0, 0
-1, d1, 0
0, 0, d1
[C]
diag(E, G)
[Bd]
0
1
0
[strain]
voigt = 1 5
[constraints]
theta = d1 w
",
    },
    Template {
        name: "rayleigh_beam",
        params: &[("E", Required), ("rho", Required), ("b", Required), ("h", Required), ("L", Length)],
        derived: &[],
        body: "\
[coords]
distributed = z1
[domain]
z1 = 0, L
[section]
rectangle(b, h)
[unknowns]
phi w
[lambda1]
-z3, 0
0, 0
0, 1
[lambda2]
-z3/2
[F]
d1, d1^2
[C]
scalar(E)
[Bd]
0
1
[strain]
voigt = 1
[constraints]
phi = d1 w
",
    },
    Template {
        name: "euler_bernoulli",
        params: &[("E", Required), ("I", Required), ("rho", Required), ("A", Required), ("L", Length)],
        derived: &[],
        body: "\
[coords]
distributed = z1
[domain]
z1 = 0, L
[section]
generic(A, I)
[unknowns]
w
[lambda1]
0
0
1
[lambda2]
-z3
[F]
d1^2
[C]
scalar(E)
[Bd]
1
[strain]
voigt = 1
[kinematics]
(-z3)*d1
0
1
",
    },
    Template {
        name: "kirchhoff_rayleigh",
        params: &[
            ("E", Required),
            ("nu", Poisson),
            ("rho", Required),
            ("h", Required),
            ("Lx", Length),
            ("Ly", Length),
        ],
        derived: &[],
        body: "\
[coords]
distributed = z1 z2
[domain]
z1 = 0, Lx
z2 = 0, Ly
[section]
interval(h)
[unknowns]
phi2 phi1 w
[lambda1]
0, -z3, 0
-z3, 0, 0
0, 0, 1
[lambda2]
-z3, 0, 0
0, -z3, 0
0, 0, -z3
[F]
0, 0, d1^2
0, 0, d2^2
d1, d2, 0
[C]
plane_stress(E, nu)
[Bd]
0
0
1
[strain]
voigt = 1 2 4
[constraints]
phi2 = d2 w
phi1 = d1 w
",
    },
    Template {
        name: "timoshenko",
        params: &[
            ("E", Required),
            ("G", Required),
            ("kappa", Required),
            ("rho", Required),
            ("b", Required),
            ("h", Required),
            ("L", Length),
        ],
        derived: &[],
        body: "\
[coords]
distributed = z1
[domain]
z1 = 0, L
[section]
rectangle(b, h)
[unknowns]
psi w
[lambda1]
-z3, 0
0, 0
0, 1
[lambda2]
-z3, 0
0, 1
[F]
d1, 0
-1, d1
[C]
diag(E, kappa*G)
[Bd]
0
1
[strain]
voigt = 1 5
",
    },
    Template {
        name: "reddy_plate",
        params: &[
            ("E", Required),
            ("nu", Poisson),
            ("G", Required),
            ("rho", Required),
            ("h", Required),
            ("Lx", Length),
            ("Ly", Length),
        ],
        derived: &["alpha = 4/(3*h^2)"],
        body: "\
[coords]
distributed = z1 z2
[domain]
z1 = 0, Lx
z2 = 0, Ly
[section]
interval(h)
[unknowns]
psi1 psi2 w theta1 theta2
[lambda1]
-(z3 - alpha*z3^3), 0, 0, -alpha*z3^3, 0
0, -(z3 - alpha*z3^3), 0, 0, -alpha*z3^3
0, 0, 1, 0, 0
[lambda2]
-(z3 - alpha*z3^3), 0, 0, 0, 0, -alpha*z3^3, 0, 0
0, -(z3 - alpha*z3^3), 0, 0, 0, 0, -alpha*z3^3, 0
0, 0, -(z3 - alpha*z3^3), 0, 0, 0, 0, -alpha*z3^3
0, 0, 0, 1 - 3*alpha*z3^2, 0, 0, 0, 0
0, 0, 0, 0, 1 - 3*alpha*z3^2, 0, 0, 0
[F]
d1, 0, 0, 0, 0
0, d2, 0, 0, 0
d2, d1, 0, 0, 0
-1, 0, d1, 0, 0
0, -1, d2, 0, 0
0, 0, 0, d1, 0
0, 0, 0, 0, d2
0, 0, 0, d2, d1
[C]
reddy_block(E, nu, G)
[Bd]
0
0
1
0
0
[strain]
voigt = 1 2 4 5 6
[constraints]
theta1 = d1 w
theta2 = d2 w
",
    },
];

/// Names of all builtin models.
pub fn builtin_names() -> Vec<&'static str> {
    TEMPLATES.iter().map(|t| t.name).collect()
}

fn template(name: &str) -> Result<&'static Template, ModelError> {
    TEMPLATES
        .iter()
        .find(|t| t.name == name)
        .ok_or_else(|| ModelError::UnknownBuiltin(name.to_string()))
}

/// Parameter names of a builtin and whether each is required.
pub fn builtin_params(name: &str) -> Result<Vec<(&'static str, bool)>, ModelError> {
    Ok(template(name)?
        .params
        .iter()
        .map(|&(p, k)| (p, !matches!(k, Length)))
        .collect())
}

fn param_error(model: &str, message: String) -> ModelError {
    ModelError::Parameter {
        model: model.to_string(),
        message,
    }
}

fn render(
    t: &Template,
    params: &BTreeMap<String, Rational>,
    overrides: &[(&str, Rational)],
) -> Result<String, ModelError> {
    for k in params.keys() {
        if !t.params.iter().any(|(p, _)| p == k) {
            let known: Vec<&str> = t.params.iter().map(|p| p.0).collect();
            return Err(param_error(
                t.name,
                format!("unknown parameter `{k}` (expected {})", known.join(", ")),
            ));
        }
    }
    let mut text = format!("phs-model 1\nname = {}\n[params]\n", t.name);
    for &(p, kind) in t.params {
        let v = match (params.get(p), kind) {
            (Some(v), _) => v.clone(),
            (None, Length) => Rational::one(),
            (None, _) => return Err(param_error(t.name, format!("missing parameter `{p}`"))),
        };
        match kind {
            Poisson if !(v > int(-1) && v < rat(1, 2)) => {
                return Err(param_error(
                    t.name,
                    format!("`{p}` = {} must lie in (-1, 1/2)", fmt_rational(&v)),
                ))
            }
            Required | Length if v <= Rational::zero() => {
                return Err(param_error(
                    t.name,
                    format!("`{p}` = {} must be positive", fmt_rational(&v)),
                ))
            }
            _ => {}
        }
        text.push_str(&format!("{p} = {}\n", fmt_rational(&v)));
    }
    for d in t.derived {
        let key = d.split('=').next().unwrap_or("").trim();
        match overrides.iter().find(|(k, _)| *k == key) {
            Some((_, v)) => text.push_str(&format!("{key} = {}\n", fmt_rational(v))),
            None => {
                text.push_str(d);
                text.push('\n');
            }
        }
    }
    text.push_str(t.body);
    Ok(text)
}

/// Model-file text of a builtin with the given parameters.
pub fn builtin_text(name: &str, params: &BTreeMap<String, Rational>) -> Result<String, ModelError> {
    render(template(name)?, params, &[])
}

/// Builds and validates a builtin model.
pub fn builtin_model(name: &str, params: &BTreeMap<String, Rational>) -> Result<KinematicModel, ModelError> {
    let m = parse_model(&builtin_text(name, params)?)?;
    let report = validate_model(&m);
    if !report.passed() {
        return Err(ModelError::Invalid {
            model: name.to_string(),
            report: report.to_string(),
        });
    }
    Ok(m)
}

/// Reddy plate with the cubic-warping constant replaced by `alpha`. With
/// `alpha = 0` the warping columns of λ₁ vanish, so the result is not
/// validated; it exists to compare against the Mindlin plate.
pub fn reddy_plate_with_alpha(
    params: &BTreeMap<String, Rational>,
    alpha: Rational,
) -> Result<KinematicModel, ModelError> {
    parse_model(&render(template("reddy_plate")?, params, &[("alpha", alpha)])?)
}

/// Torsion with its two shear strains kept separate: λ₂ = diag(z3, -z2),
/// 𝓕 = [d1; d1]. Used only to check the reduction to the single-strain
/// builtin.
pub fn torsion_two_strain(params: &BTreeMap<String, Rational>) -> Result<KinematicModel, ModelError> {
    let text = builtin_text("torsion", params)?
        .replace("[lambda2]\nz3\n-z2\n", "[lambda2]\nz3, 0\n0, -z2\n")
        .replace("[F]\nd1\n", "[F]\nd1\nd1\n")
        .replace("name = torsion", "name = torsion_two_strain");
    let m = parse_model(&text)?;
    let report = validate_model(&m);
    if !report.passed() {
        return Err(ModelError::Invalid {
            model: m.name,
            report: report.to_string(),
        });
    }
    Ok(m)
}

fn values(name: &str, table: &[(&str, Rational)]) -> BTreeMap<String, Rational> {
    let wanted = template(name).expect("builtin exists").params;
    table
        .iter()
        .filter(|(k, _)| wanted.iter().any(|(p, _)| p == k))
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// Dimensionless parameters for quick experiments and simulation.
pub fn default_params(name: &str) -> Result<BTreeMap<String, Rational>, ModelError> {
    template(name)?;
    let table = [
        ("E", int(1)),
        ("G", rat(1, 2)),
        ("nu", rat(3, 10)),
        ("kappa", rat(5, 6)),
        ("rho", int(1)),
        ("b", int(1)),
        ("h", int(1)),
        ("T", int(1)),
        ("A", int(1)),
        ("I", int(1)),
        ("R", int(1)),
    ];
    Ok(values(name, &table))
}

/// Steel-like parameters in SI units: E = 200 GPa, ν = 3/10,
/// G = E/(2(1+ν)), κ = 5/6, ρ = 7850, 10 cm square or 10 cm thick sections.
pub fn physical_params(name: &str) -> Result<BTreeMap<String, Rational>, ModelError> {
    template(name)?;
    let e = int(200_000_000_000);
    let nu = rat(3, 10);
    let g = &e / (int(2) * (Rational::one() + &nu));
    let b = rat(1, 10);
    let h = rat(1, 10);
    let area = &b * &h;
    let second = &b * &h * &h * &h / int(12);
    let table = [
        ("E", e),
        ("G", g),
        ("nu", nu),
        ("kappa", rat(5, 6)),
        ("rho", int(7850)),
        ("b", b),
        ("h", h),
        ("T", int(1000)),
        ("A", area),
        ("I", second),
        ("R", rat(1, 20)),
        ("L", int(2)),
        ("Lx", int(2)),
        ("Ly", int(1)),
        ("Lz", int(1)),
    ];
    Ok(values(name, &table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_builtins() {
        assert_eq!(builtin_names().len(), 12);
    }

    #[test]
    fn every_builtin_builds_with_default_and_physical_params() {
        for name in builtin_names() {
            builtin_model(name, &default_params(name).unwrap()).unwrap_or_else(|e| panic!("{e}"));
            builtin_model(name, &physical_params(name).unwrap()).unwrap_or_else(|e| panic!("{e}"));
        }
    }

    #[test]
    fn every_builtin_round_trips() {
        for name in builtin_names() {
            let m = builtin_model(name, &physical_params(name).unwrap()).unwrap();
            let again = parse_model(&crate::model::to_model_text(&m)).unwrap();
            assert_eq!(m, again, "{name}");
        }
    }

    #[test]
    fn parameter_errors() {
        let mut p = default_params("timoshenko").unwrap();
        p.remove("kappa");
        assert!(matches!(builtin_model("timoshenko", &p), Err(ModelError::Parameter { .. })));
        let mut p = default_params("mindlin_plate").unwrap();
        p.insert("nu".into(), rat(1, 2));
        assert!(builtin_model("mindlin_plate", &p).is_err());
        let mut p = default_params("string").unwrap();
        p.insert("zeta".into(), int(1));
        assert!(builtin_model("string", &p).is_err());
        assert!(matches!(builtin_model("kirchhoff_love", &p), Err(ModelError::UnknownBuiltin(_))));
    }

    #[test]
    fn reddy_plate_dimensions() {
        let m = builtin_model("reddy_plate", &default_params("reddy_plate").unwrap()).unwrap();
        assert_eq!((m.n(), m.m(), m.d()), (5, 8, 5));
        assert_eq!(m.params["alpha"], rat(4, 3));
    }

    #[test]
    fn alpha_zero_reddy_has_empty_warping_columns() {
        let m = reddy_plate_with_alpha(&default_params("reddy_plate").unwrap(), int(0)).unwrap();
        assert_eq!(m.lambda1.zero_columns(), vec![3, 4]);
    }
}
