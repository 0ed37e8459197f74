//! Structural checks on a resolved model.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::KinematicModel;
use crate::poly::{random_poly, Poly};
use crate::rational::fmt_rational;

/// Number of random displacement fields used by the strain check.
pub const STRAIN_TRIALS: u64 = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail { witness: String },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub status: CheckStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        !self.checks.iter().any(|c| matches!(c.status, CheckStatus::Fail { .. }))
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| matches!(c.status, CheckStatus::Fail { .. }))
    }

    pub fn get(&self, name: &str) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.status {
                CheckStatus::Pass => writeln!(f, "  pass  {}", c.name)?,
                CheckStatus::Fail { witness } => writeln!(f, "  FAIL  {}: {witness}", c.name)?,
                CheckStatus::Skipped { reason } => writeln!(f, "  skip  {}: {reason}", c.name)?,
            }
        }
        Ok(())
    }
}

fn status(failure: Option<String>) -> CheckStatus {
    match failure {
        None => CheckStatus::Pass,
        Some(witness) => CheckStatus::Fail { witness },
    }
}

fn coordinate_partition(m: &KinematicModel) -> Option<String> {
    let total = m.coords.len();
    if m.ell == 0 || m.ell > total {
        return Some(format!("{} distributed coordinates out of {total}", m.ell));
    }
    if m.domain.ell() != m.ell {
        return Some(format!(
            "domain spans {} axes but {} coordinates are distributed",
            m.domain.ell(),
            m.ell
        ));
    }
    if m.section.dims() != total - m.ell {
        return Some(format!(
            "section spans {} coordinates but {} are complementary",
            m.section.dims(),
            total - m.ell
        ));
    }
    None
}

fn dimensions(m: &KinematicModel) -> Option<String> {
    let (n, mm, d) = (m.n(), m.m(), m.d());
    let mut bad = Vec::new();
    if m.lambda1.rows() != 3 || m.lambda1.cols() != n {
        bad.push(format!("lambda1 is {}x{}, expected 3x{n}", m.lambda1.rows(), m.lambda1.cols()));
    }
    if m.lambda2.cols() != mm {
        bad.push(format!("lambda2 has {} columns, expected {mm}", m.lambda2.cols()));
    }
    if m.c.shape() != (d, d) {
        bad.push(format!("C is {}x{}, expected {d}x{d}", m.c.rows(), m.c.cols()));
    }
    if m.f.ell() != m.ell {
        bad.push(format!("operator acts on {} axes, model has {}", m.f.ell(), m.ell));
    }
    if let Some(bd) = &m.bd {
        if bd.rows() != n {
            bad.push(format!("Bd has {} rows, expected {n}", bd.rows()));
        }
    }
    if m.unknowns.len() != n {
        bad.push(format!("{} unknown names for {n} unknowns", m.unknowns.len()));
    }
    if !m.strain.voigt.is_empty() && m.strain.voigt.len() != d {
        bad.push(format!("{} Voigt components for d = {d}", m.strain.voigt.len()));
    }
    if let Some(k) = &m.strain.kinematics {
        if k.rows != 3 || k.cols != n {
            bad.push(format!("kinematics is {}x{}, expected 3x{n}", k.rows, k.cols));
        }
    }
    (!bad.is_empty()).then(|| bad.join("; "))
}

fn lambda_support(m: &KinematicModel) -> Option<String> {
    for (label, mat) in [("lambda1", &m.lambda1), ("lambda2", &m.lambda2)] {
        for i in 0..mat.rows() {
            for j in 0..mat.cols() {
                let p = mat.get(i, j);
                if let Some(v) = (0..m.ell).find(|&v| p.depends_on(v)) {
                    return Some(format!(
                        "{label}[{},{}] = {p} depends on distributed coordinate `{}`",
                        i + 1,
                        j + 1,
                        m.coords.name(v)
                    ));
                }
            }
        }
    }
    None
}

fn one_based(v: &[usize]) -> String {
    v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(", ")
}

fn lambda1_columns(m: &KinematicModel) -> Option<String> {
    let z = m.lambda1.zero_columns();
    (!z.is_empty()).then(|| {
        format!(
            "lambda1 column(s) {} are zero; the kinematic assumption u = lambda1 r needs every \
             generalized displacement to move the body",
            one_based(&z)
        )
    })
}

fn lambda2_rows_cols(m: &KinematicModel) -> Option<String> {
    let r = m.lambda2.zero_rows();
    let c = m.lambda2.zero_columns();
    match (r.is_empty(), c.is_empty()) {
        (true, true) => None,
        _ => Some(format!("lambda2 zero rows [{}], zero columns [{}]", one_based(&r), one_based(&c))),
    }
}

fn operator_rows_cols(m: &KinematicModel) -> Option<String> {
    let f = &m.f;
    let rows: Vec<usize> = (0..f.m()).filter(|&i| (0..f.n()).all(|j| f.entry_is_zero(i, j))).collect();
    let cols: Vec<usize> = (0..f.n()).filter(|&j| (0..f.m()).all(|i| f.entry_is_zero(i, j))).collect();
    match (rows.is_empty(), cols.is_empty()) {
        (true, true) => None,
        _ => Some(format!("F zero rows [{}], zero columns [{}]", one_based(&rows), one_based(&cols))),
    }
}

fn c_symmetric(m: &KinematicModel) -> Option<String> {
    let c = &m.c;
    if c.rows() != c.cols() {
        return Some("C is not square".into());
    }
    for i in 0..c.rows() {
        for j in 0..i {
            if c.get(i, j) != c.get(j, i) {
                return Some(format!(
                    "C[{},{}] = {} but C[{},{}] = {}",
                    i + 1,
                    j + 1,
                    fmt_rational(c.get(i, j)),
                    j + 1,
                    i + 1,
                    fmt_rational(c.get(j, i))
                ));
            }
        }
    }
    None
}

fn c_positive(m: &KinematicModel) -> Option<String> {
    if m.c.rows() != m.c.cols() {
        return Some("C is not square".into());
    }
    m.c.positive_definite().err().map(|w| {
        format!(
            "leading principal minor of order {} is {} (must be > 0)",
            w.order,
            fmt_rational(&w.value)
        )
    })
}

/// Voigt strain of a displacement field over the three Cartesian
/// coordinates: (∂1u1, ∂2u2, ∂3u3, ∂2u1+∂1u2, ∂3u1+∂1u3, ∂3u2+∂2u3).
pub fn voigt_strain(u: &[Poly]) -> [Poly; 6] {
    let d = |i: usize, k: usize| u[i].differentiate(k);
    [
        d(0, 0),
        d(1, 1),
        d(2, 2),
        &d(0, 1) + &d(1, 0),
        &d(0, 2) + &d(2, 0),
        &d(1, 2) + &d(2, 1),
    ]
}

/// Generalized displacements for one strain trial: random polynomials in
/// the distributed coordinates for free unknowns, derivatives for
/// constrained ones.
pub fn trial_displacements(m: &KinematicModel, seed: u64) -> Vec<Poly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<usize> = (0..m.ell).collect();
    let degree = m.order() as u32 + 2;
    let constrained: Vec<usize> = m.strain.constraints.iter().map(|c| c.target).collect();
    let mut r: Vec<Poly> = (0..m.n())
        .map(|i| {
            if constrained.contains(&i) {
                Poly::zero(&m.coords)
            } else {
                random_poly(&m.coords, &vars, degree, &mut rng)
            }
        })
        .collect();
    for c in &m.strain.constraints {
        r[c.target] = r[c.source].differentiate_n(c.axis - 1, c.order);
    }
    r
}

fn strain_trial(m: &KinematicModel, seed: u64) -> Option<String> {
    let r = trial_displacements(m, seed);
    let u = match &m.strain.kinematics {
        Some(k) => k.apply(&r),
        None => m.lambda1.apply(&r),
    };
    let eps = voigt_strain(&u);
    let fr = match m.f.apply(&r) {
        Ok(v) => v,
        Err(e) => return Some(e.to_string()),
    };
    let declared = m.lambda2.apply(&fr);
    for (row, &k) in m.strain.voigt.iter().enumerate() {
        if declared[row] != eps[k - 1] {
            return Some(format!(
                "strain component {} (Voigt {k}): lambda2 F r = {} but L u = {} on field seed {seed}",
                row + 1,
                declared[row],
                eps[k - 1]
            ));
        }
    }
    for (k, e) in eps.iter().enumerate() {
        if !m.strain.voigt.contains(&(k + 1)) && !e.is_zero() {
            return Some(format!(
                "Voigt component {} = {e} is nonzero but not represented by lambda2 F r (seed {seed})",
                k + 1
            ));
        }
    }
    None
}

fn strain_factorization(m: &KinematicModel) -> CheckStatus {
    if m.strain.voigt.is_empty() {
        return CheckStatus::Skipped {
            reason: "no [strain] declaration".into(),
        };
    }
    if m.strain.voigt.len() != m.d() {
        return CheckStatus::Fail {
            witness: "Voigt component count differs from d".into(),
        };
    }
    status((0..STRAIN_TRIALS).find_map(|t| strain_trial(m, t)))
}

/// Runs every structural check and reports each outcome.
pub fn validate_model(m: &KinematicModel) -> ValidationReport {
    let mut checks = vec![
        ValidationCheck {
            name: "coordinate-partition",
            status: status(coordinate_partition(m)),
        },
        ValidationCheck {
            name: "dimensions",
            status: status(dimensions(m)),
        },
    ];
    if !matches!(checks[1].status, CheckStatus::Pass) {
        return ValidationReport { checks };
    }
    let rest: [(&'static str, fn(&KinematicModel) -> Option<String>); 6] = [
        ("lambda-support", lambda_support),
        ("lambda1-columns", lambda1_columns),
        ("lambda2-rows-cols", lambda2_rows_cols),
        ("operator-rows-cols", operator_rows_cols),
        ("c-symmetric", c_symmetric),
        ("c-positive-definite", c_positive),
    ];
    for (name, f) in rest {
        checks.push(ValidationCheck {
            name,
            status: status(f(m)),
        });
    }
    checks.push(ValidationCheck {
        name: "strain-factorization",
        status: strain_factorization(m),
    });
    ValidationReport { checks }
}
