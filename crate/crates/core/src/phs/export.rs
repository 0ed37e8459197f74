//! JSON and CSV renderings of a compiled system.
//!
//! JSON keeps every quantity exact: rationals are `"num/den"` strings and
//! π-tagged matrices carry their power of π separately. CSV files hold the
//! binary64 values for external tools.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diff_op::DiffOpMatrix;
use crate::matrix::{ExactMatrix, RatMatrix};
use crate::rational::{fmt_fraction, Rational};

use super::PHSystem;

pub const EXPORT_FORMAT: &str = "phs-forge-system";
pub const EXPORT_VERSION: u32 = 1;

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    #[serde(rename = "N")]
    pub order: usize,
    pub ell: usize,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct PiMatrixDoc {
    pub pi_power: i32,
    pub entries: Vec<Vec<String>>,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct CoefficientDoc {
    pub axis: usize,
    pub order: usize,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct OperatorDoc {
    pub rows: usize,
    pub cols: usize,
    pub p0: Vec<Vec<String>>,
    pub coefficients: Vec<CoefficientDoc>,
    /// Entry-wise text such as `d1`, `-1`, `d1^2 + 1`.
    pub entries: Vec<Vec<String>>,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct BoundaryDoc {
    #[serde(rename = "N")]
    pub order: usize,
    pub shape: [usize; 2],
    pub normal_symbols: Vec<String>,
    /// `P_∂` with entries written as linear forms in the normal symbols.
    pub p_boundary: Vec<Vec<String>>,
    /// `Q_∂` with entries written as linear forms in the normal symbols.
    pub q: Vec<Vec<String>>,
    /// `Q_∂` evaluated at each unit normal `e_k`.
    pub axis_matrices: Vec<Vec<Vec<String>>>,
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct LabelDoc {
    pub momentum: String,
    pub conjugate_to: String,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct ExportDocument {
    pub format: &'static str,
    pub version: u32,
    pub model: String,
    pub dims: Dims,
    pub params: BTreeMap<String, String>,
    pub section: String,
    pub rho: String,
    pub unknowns: Vec<String>,
    pub momenta: Vec<LabelDoc>,
    pub strains: Vec<String>,
    pub mass: PiMatrixDoc,
    pub mass_inverse: PiMatrixDoc,
    pub stiffness: PiMatrixDoc,
    pub f: OperatorDoc,
    pub f_star: OperatorDoc,
    /// The block operator acting on `(e_p, e_ε)`.
    pub j: OperatorDoc,
    pub bd: Option<Vec<Vec<String>>>,
    pub boundary: BoundaryDoc,
}

fn rat_grid(q: &RatMatrix) -> Vec<Vec<String>> {
    (0..q.rows())
        .map(|i| q.row(i).iter().map(fmt_fraction).collect())
        .collect()
}

fn pi_doc(m: &ExactMatrix) -> PiMatrixDoc {
    PiMatrixDoc {
        pi_power: m.pi_pow,
        entries: rat_grid(&m.q),
    }
}

fn operator_doc(d: &DiffOpMatrix) -> OperatorDoc {
    OperatorDoc {
        rows: d.m(),
        cols: d.n(),
        p0: rat_grid(d.p0()),
        coefficients: d
            .terms()
            .iter()
            .map(|(&(axis, order), c)| CoefficientDoc {
                axis,
                order,
                matrix: rat_grid(c),
            })
            .collect(),
        entries: (0..d.m())
            .map(|r| (0..d.n()).map(|c| d.entry_text(r, c)).collect())
            .collect(),
    }
}

/// `c1*n1 + c2*n2 …` with zero terms dropped; `0/1` when all vanish.
pub fn linear_form(coeffs: &[&Rational], symbols: &[String]) -> String {
    let parts: Vec<String> = coeffs
        .iter()
        .zip(symbols)
        .filter(|(c, _)| !num_traits::Zero::is_zero(**c))
        .map(|(c, s)| format!("{}*{}", fmt_fraction(c), s))
        .collect();
    if parts.is_empty() {
        "0/1".into()
    } else {
        parts.join(" + ")
    }
}

fn linear_grid(per_axis: &[RatMatrix], symbols: &[String]) -> Vec<Vec<String>> {
    let (rows, cols) = per_axis[0].shape();
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let cs: Vec<&Rational> = per_axis.iter().map(|a| a.get(i, j)).collect();
                    linear_form(&cs, symbols)
                })
                .collect()
        })
        .collect()
}

fn unit(ell: usize, k: usize) -> Vec<Rational> {
    (0..ell)
        .map(|i| Rational::from_integer(((i == k) as i64).into()))
        .collect()
}

impl ExportDocument {
    pub fn new(s: &PHSystem) -> Self {
        let m = &s.model;
        let ell = s.boundary.ell();
        let symbols: Vec<String> = (1..=ell).map(|k| format!("n{k}")).collect();
        let axis = s.boundary.axis_matrices();
        let p_axis: Vec<RatMatrix> = (0..ell)
            .map(|k| s.boundary.p_boundary(&unit(ell, k)))
            .collect();
        let ports = super::boundary_port_map(s, &unit(ell, 0)).expect("unit normal");
        let (r, c) = s.boundary.shape();
        ExportDocument {
            format: EXPORT_FORMAT,
            version: EXPORT_VERSION,
            model: m.name.clone(),
            dims: Dims {
                n: m.n(),
                m: m.m(),
                d: m.d(),
                order: m.order(),
                ell: m.ell,
            },
            params: m
                .params
                .iter()
                .map(|(k, v)| (k.clone(), fmt_fraction(v)))
                .collect(),
            section: m.section.to_text(),
            rho: fmt_fraction(&m.rho),
            unknowns: m.unknowns.clone(),
            momenta: s
                .labels
                .momenta
                .iter()
                .map(|(p, u)| LabelDoc {
                    momentum: p.clone(),
                    conjugate_to: u.clone(),
                })
                .collect(),
            strains: s.labels.strains.clone(),
            mass: pi_doc(&s.mass),
            mass_inverse: pi_doc(&s.mass_inverse),
            stiffness: pi_doc(&s.stiffness),
            f: operator_doc(&s.f),
            f_star: operator_doc(&s.f_star),
            j: operator_doc(&s.j),
            bd: s.bd.as_ref().map(rat_grid),
            boundary: BoundaryDoc {
                order: s.boundary.order(),
                shape: [r, c],
                p_boundary: linear_grid(&p_axis, &symbols),
                q: linear_grid(&axis, &symbols),
                axis_matrices: axis.iter().map(rat_grid).collect(),
                normal_symbols: symbols,
                input_labels: ports.input_labels,
                output_labels: ports.output_labels,
            },
        }
    }
}

/// Pretty-printed JSON export, newline-terminated.
pub fn export_json(s: &PHSystem) -> String {
    let mut out = serde_json::to_string_pretty(&ExportDocument::new(s)).expect("serializable");
    out.push('\n');
    out
}

fn write_matrix(path: &Path, rows: &[Vec<f64>]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.15e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes float renderings of `M`, `M⁻¹`, `K`, the coefficients of `F` and
/// the axis matrices of `Q_∂` into `dir`; returns the files written.
pub fn export_csv(s: &PHSystem, dir: &Path) -> Result<Vec<PathBuf>, csv::Error> {
    std::fs::create_dir_all(dir)?;
    let mut files: Vec<(String, Vec<Vec<f64>>)> = vec![
        ("M.csv".into(), s.mass.to_f64_rows()),
        ("M_inv.csv".into(), s.mass_inverse.to_f64_rows()),
        ("K.csv".into(), s.stiffness.to_f64_rows()),
        ("F_P0.csv".into(), s.f.p0().to_f64_rows()),
    ];
    for (&(axis, order), c) in s.f.terms() {
        files.push((format!("F_P{axis}_{order}.csv"), c.to_f64_rows()));
    }
    for (k, q) in s.boundary.axis_matrices().iter().enumerate() {
        files.push((format!("Q_n{}.csv", k + 1), q.to_f64_rows()));
    }
    if let Some(bd) = &s.bd {
        files.push(("Bd.csv".into(), bd.to_f64_rows()));
    }
    let mut written = Vec::new();
    for (name, rows) in files {
        let path = dir.join(name);
        write_matrix(&path, &rows)?;
        written.push(path);
    }
    Ok(written)
}
