//! Reader and writer for the text model format (version 1).
//!
//! ```text
//! phs-model 1
//! name = timoshenko
//!
//! [coords]            names = z1 z2 z3 / distributed = z1 / complementary = z2 z3
//! [params]            one `NAME = expr` per line, evaluated in order; `rho` is required
//! [domain]            `z1 = lo, hi` per distributed coordinate
//! [section]           none | interval(h) | rectangle(b, h) | circle(R) | generic(A[, I])
//! [unknowns]          optional names of the generalized displacements
//! [lambda1]           3 rows of polynomials in the complementary coordinates
//! [lambda2]           d rows
//! [F]                 m rows of operator entries: d1, d1^2, -1, 2*d2 - 1, 0
//! [C]                 a preset call or d rows of constants
//! [Bd]                optional n rows of constants
//! [strain]            voigt = <component indices 1..6 represented by λ2 F r>
//! [constraints]       optional `name = dK[^i] name` relations between unknowns
//! [kinematics]        optional 3 rows of operator entries replacing λ1 for strains
//! ```
//!
//! Entries within a row are comma separated. `#` starts a comment. Every
//! number is an exact rational literal.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::Zero;

use super::expr::{
    format_terms, parse_constant, parse_poly, parse_terms, split_top_level, Allow, ExprContext,
    ExprError, OpTerms,
};
use super::{
    Constraint, ConstitutivePreset, KinematicModel, ModelError, OpPolyMatrix, Section, StrainSpec,
};
use crate::diff_op::{DiffOpMatrix, DomainSpec};
use crate::matrix::RatMatrix;
use crate::poly::{CoordSet, Poly, PolyMatrix};
use crate::rational::{fmt_rational, Rational};

/// Format version written in the header line.
pub const FORMAT_VERSION: u32 = 1;

const SECTIONS: &[&str] = &[
    "coords",
    "params",
    "domain",
    "section",
    "unknowns",
    "lambda1",
    "lambda2",
    "F",
    "C",
    "Bd",
    "strain",
    "constraints",
    "kinematics",
];

type Lines = Vec<(usize, String)>;

fn syntax(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        message: message.into(),
    }
}

fn expr_err(line: usize) -> impl Fn(ExprError) -> ModelError {
    move |source| ModelError::Expr { line, source }
}

fn key_value(line: usize, text: &str) -> Result<(String, String), ModelError> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| syntax(line, format!("expected `key = value`, found `{text}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

struct Document {
    top: Lines,
    sections: BTreeMap<String, Lines>,
    section_lines: BTreeMap<String, usize>,
}

fn split_document(text: &str) -> Result<Document, ModelError> {
    let mut header_seen = false;
    let mut top = Vec::new();
    let mut sections: BTreeMap<String, Lines> = BTreeMap::new();
    let mut section_lines = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if !header_seen {
            let mut it = body.split_whitespace();
            if it.next() != Some("phs-model") {
                return Err(syntax(line, "missing `phs-model <version>` header"));
            }
            let v: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| syntax(line, "header needs a numeric version"))?;
            if v != FORMAT_VERSION {
                return Err(syntax(
                    line,
                    format!("unsupported format version {v} (this build reads {FORMAT_VERSION})"),
                ));
            }
            header_seen = true;
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(syntax(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                return Err(syntax(line, format!("duplicate section [{name}]")));
            }
            sections.insert(name.clone(), Vec::new());
            section_lines.insert(name.clone(), line);
            current = Some(name);
            continue;
        }
        match &current {
            Some(s) => sections.get_mut(s).unwrap().push((line, body.to_string())),
            None => top.push((line, body.to_string())),
        }
    }
    if !header_seen {
        return Err(syntax(1, "empty model file"));
    }
    Ok(Document {
        top,
        sections,
        section_lines,
    })
}

impl Document {
    fn required(&self, name: &str) -> Result<&Lines, ModelError> {
        self.sections
            .get(name)
            .ok_or_else(|| syntax(0, format!("missing section [{name}]")))
    }

    fn line_of(&self, name: &str) -> usize {
        self.section_lines.get(name).copied().unwrap_or(0)
    }
}

fn words(s: &str) -> Vec<String> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_coords(doc: &Document) -> Result<(Arc<CoordSet>, usize), ModelError> {
    let lines = doc.required("coords")?;
    let mut names = vec!["z1".to_string(), "z2".into(), "z3".into()];
    let mut distributed: Option<(usize, Vec<String>)> = None;
    let mut complementary: Option<(usize, Vec<String>)> = None;
    for (line, text) in lines {
        let (k, v) = key_value(*line, text)?;
        match k.as_str() {
            "names" => names = words(&v),
            "distributed" => distributed = Some((*line, words(&v))),
            "complementary" => complementary = Some((*line, words(&v))),
            _ => return Err(syntax(*line, format!("unknown key `{k}` in [coords]"))),
        }
    }
    let line0 = doc.line_of("coords");
    if names.len() != 3 {
        return Err(syntax(line0, "exactly three Cartesian coordinate names are required"));
    }
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(syntax(line0, format!("duplicate coordinate `{n}`")));
        }
        if n.starts_with('d') && n[1..].chars().all(|c| c.is_ascii_digit()) {
            return Err(syntax(line0, format!("coordinate name `{n}` clashes with derivative syntax")));
        }
    }
    let (dline, dist) = distributed.ok_or_else(|| syntax(line0, "[coords] needs `distributed`"))?;
    for d in &dist {
        if !names.contains(d) {
            return Err(ModelError::Expr {
                line: dline,
                source: ExprError::UnknownCoord(d.clone()),
            });
        }
    }
    let ell = dist.len();
    if ell == 0 || dist.iter().zip(&names).any(|(a, b)| a != b) {
        return Err(syntax(
            dline,
            "distributed coordinates must be a non-empty leading run of the coordinate names",
        ));
    }
    if let Some((cline, comp)) = complementary {
        for c in &comp {
            if !names.contains(c) {
                return Err(ModelError::Expr {
                    line: cline,
                    source: ExprError::UnknownCoord(c.clone()),
                });
            }
            if dist.contains(c) {
                return Err(syntax(
                    cline,
                    format!("coordinate `{c}` is both distributed and complementary"),
                ));
            }
        }
        if comp.as_slice() != &names[ell..] {
            return Err(syntax(
                cline,
                "complementary coordinates must be the remaining names in order",
            ));
        }
    }
    Ok((CoordSet::new(&names), ell))
}

fn parse_call(text: &str) -> Option<(String, Vec<String>)> {
    let open = text.find('(')?;
    let name = text[..open].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return None;
    }
    let inner = text[open + 1..].trim_end().strip_suffix(')')?;
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        split_top_level(inner)
    };
    Some((name.to_string(), args))
}

fn parse_section(doc: &Document, ctx: &ExprContext<'_>) -> Result<Section, ModelError> {
    let lines = doc.required("section")?;
    let [(line, text)] = lines.as_slice() else {
        return Err(syntax(doc.line_of("section"), "[section] takes exactly one line"));
    };
    if text.trim() == "none" {
        return Ok(Section::None);
    }
    let (name, args) =
        parse_call(text).ok_or_else(|| syntax(*line, format!("cannot read section `{text}`")))?;
    let vals: Vec<Rational> = args
        .iter()
        .map(|a| parse_constant(a, ctx).map_err(expr_err(*line)))
        .collect::<Result<_, _>>()?;
    let need = |k: usize| {
        if vals.len() == k {
            Ok(())
        } else {
            Err(syntax(*line, format!("{name}(...) takes {k} argument(s)")))
        }
    };
    let s = match name.as_str() {
        "interval" => {
            need(1)?;
            Section::Interval { h: vals[0].clone() }
        }
        "rectangle" => {
            need(2)?;
            Section::Rectangle {
                b: vals[0].clone(),
                h: vals[1].clone(),
            }
        }
        "circle" => {
            need(1)?;
            Section::Circle { r: vals[0].clone() }
        }
        "generic" => {
            if vals.is_empty() || vals.len() > 2 {
                return Err(syntax(*line, "generic(A[, I]) takes one or two arguments"));
            }
            Section::Generic {
                area: vals[0].clone(),
                second_moment: vals.get(1).cloned(),
            }
        }
        _ => return Err(syntax(*line, format!("unknown section kind `{name}`"))),
    };
    for v in &vals {
        if v <= &Rational::zero() {
            return Err(syntax(*line, "section dimensions must be positive"));
        }
    }
    Ok(s)
}

fn rows_of(lines: &Lines) -> Vec<(usize, Vec<String>)> {
    lines
        .iter()
        .map(|(l, t)| (*l, split_top_level(t)))
        .collect()
}

fn check_rect(name: &str, rows: &[(usize, Vec<String>)], line0: usize) -> Result<usize, ModelError> {
    let cols = rows.first().map(|r| r.1.len()).ok_or_else(|| syntax(line0, format!("[{name}] is empty")))?;
    for (l, r) in rows {
        if r.len() != cols {
            return Err(syntax(*l, format!("[{name}] row has {} entries, expected {cols}", r.len())));
        }
    }
    Ok(cols)
}

fn parse_poly_matrix(doc: &Document, name: &str, ctx: &ExprContext<'_>) -> Result<PolyMatrix, ModelError> {
    let rows = rows_of(doc.required(name)?);
    check_rect(name, &rows, doc.line_of(name))?;
    let mut out = Vec::new();
    for (l, r) in rows {
        out.push(
            r.iter()
                .map(|e| parse_poly(e, ctx).map_err(expr_err(l)))
                .collect::<Result<Vec<Poly>, _>>()?,
        );
    }
    Ok(PolyMatrix::from_rows(out))
}

fn parse_const_rows(lines: &Lines, name: &str, line0: usize, ctx: &ExprContext<'_>) -> Result<RatMatrix, ModelError> {
    let rows = rows_of(lines);
    check_rect(name, &rows, line0)?;
    let mut out = Vec::new();
    for (l, r) in rows {
        out.push(
            r.iter()
                .map(|e| parse_constant(e, ctx).map_err(expr_err(l)))
                .collect::<Result<Vec<Rational>, _>>()?,
        );
    }
    Ok(RatMatrix::from_rows(out))
}

fn parse_op_rows(doc: &Document, name: &str, ctx: &ExprContext<'_>) -> Result<(usize, usize, Vec<(usize, OpTerms)>), ModelError> {
    let rows = rows_of(doc.required(name)?);
    let cols = check_rect(name, &rows, doc.line_of(name))?;
    let mut entries = Vec::new();
    for (l, r) in &rows {
        for e in r {
            entries.push((*l, parse_terms(e, ctx).map_err(expr_err(*l))?));
        }
    }
    Ok((rows.len(), cols, entries))
}

fn parse_operator(doc: &Document, ell: usize, ctx: &ExprContext<'_>) -> Result<DiffOpMatrix, ModelError> {
    let (m, n, entries) = parse_op_rows(doc, "F", ctx)?;
    let mut p0 = RatMatrix::zeros(m, n);
    let mut terms: BTreeMap<(usize, usize), RatMatrix> = BTreeMap::new();
    for (idx, (line, t)) in entries.into_iter().enumerate() {
        let (r, c) = (idx / n, idx % n);
        for ((axis, order), coef) in t {
            let k = coef.as_constant().ok_or_else(|| {
                syntax(line, "operator coefficients in [F] must be constants")
            })?;
            if axis == 0 {
                p0.set(r, c, k);
                continue;
            }
            if axis > ell {
                return Err(syntax(
                    line,
                    format!("d{axis} differentiates along a coordinate that is not distributed"),
                ));
            }
            terms
                .entry((axis, order))
                .or_insert_with(|| RatMatrix::zeros(m, n))
                .set(r, c, k);
        }
    }
    DiffOpMatrix::new(m, n, ell, p0, terms).map_err(|e| syntax(doc.line_of("F"), e.to_string()))
}

fn parse_constitutive(doc: &Document, ctx: &ExprContext<'_>) -> Result<RatMatrix, ModelError> {
    let lines = doc.required("C")?;
    if let [(line, text)] = lines.as_slice() {
        if let Some((name, args)) = parse_call(text) {
            let vals: Vec<Rational> = args
                .iter()
                .map(|a| parse_constant(a, ctx).map_err(expr_err(*line)))
                .collect::<Result<_, _>>()?;
            if name == "diag" {
                return Ok(RatMatrix::diag(&vals));
            }
            if let Some(p) = ConstitutivePreset::from_name(&name) {
                if vals.len() != p.arity() {
                    return Err(syntax(*line, format!("{name}(...) takes {} argument(s)", p.arity())));
                }
                return Ok(p.matrix(&vals));
            }
            if split_top_level(text).len() == 1 {
                return Err(syntax(*line, format!("unknown constitutive preset `{name}`")));
            }
        }
    }
    parse_const_rows(lines, "C", doc.line_of("C"), ctx)
}

fn parse_derivative(tok: &str) -> Option<(usize, usize)> {
    let (d, o) = match tok.split_once('^') {
        Some((d, o)) => (d, o.parse().ok()?),
        None => (tok, 1),
    };
    let axis: usize = d.strip_prefix('d')?.parse().ok()?;
    (axis > 0 && o > 0).then_some((axis, o))
}

fn parse_constraints(doc: &Document, unknowns: &[String], ell: usize) -> Result<Vec<Constraint>, ModelError> {
    let Some(lines) = doc.sections.get("constraints") else {
        return Ok(Vec::new());
    };
    let index = |line: usize, name: &str| {
        unknowns
            .iter()
            .position(|u| u == name)
            .ok_or_else(|| syntax(line, format!("unknown generalized displacement `{name}`")))
    };
    let mut out = Vec::new();
    for (line, text) in lines {
        let (lhs, rhs) = key_value(*line, text)?;
        let parts: Vec<&str> = rhs.split_whitespace().collect();
        let [d, src] = parts.as_slice() else {
            return Err(syntax(*line, "constraint must read `name = dK[^i] name`"));
        };
        let (axis, order) = parse_derivative(d)
            .ok_or_else(|| syntax(*line, format!("expected a derivative such as d1, found `{d}`")))?;
        if axis > ell {
            return Err(syntax(*line, format!("d{axis} differentiates along a coordinate that is not distributed")));
        }
        let target = index(*line, &lhs)?;
        let source = index(*line, src)?;
        if target == source {
            return Err(syntax(*line, "a constraint cannot refer to itself"));
        }
        out.push(Constraint {
            target,
            axis,
            order,
            source,
        });
    }
    let targets: Vec<usize> = out.iter().map(|c| c.target).collect();
    for (i, c) in out.iter().enumerate() {
        if targets[..i].contains(&c.target) {
            return Err(syntax(doc.line_of("constraints"), format!("`{}` is constrained twice", unknowns[c.target])));
        }
        if targets.contains(&c.source) {
            return Err(syntax(
                doc.line_of("constraints"),
                format!("`{}` is itself constrained and cannot be a source", unknowns[c.source]),
            ));
        }
    }
    Ok(out)
}

/// Reads a model file. Structural assumptions are checked separately by
/// [`super::validate_model`].
pub fn parse_model(text: &str) -> Result<KinematicModel, ModelError> {
    let doc = split_document(text)?;
    let mut name = "unnamed".to_string();
    for (line, t) in &doc.top {
        let (k, v) = key_value(*line, t)?;
        match k.as_str() {
            "name" => name = v,
            _ => return Err(syntax(*line, format!("unknown top-level key `{k}`"))),
        }
    }
    let (coords, ell) = parse_coords(&doc)?;

    let mut params: BTreeMap<String, Rational> = BTreeMap::new();
    for (line, t) in doc.required("params")? {
        let (k, v) = key_value(*line, t)?;
        if coords.index_of(&k).is_some() || parse_derivative(&k).is_some() {
            return Err(syntax(*line, format!("parameter name `{k}` is reserved")));
        }
        if !k.chars().all(|c| c.is_alphanumeric() || c == '_') || k.is_empty() {
            return Err(syntax(*line, format!("invalid parameter name `{k}`")));
        }
        if params.contains_key(&k) {
            return Err(syntax(*line, format!("parameter `{k}` bound twice")));
        }
        let ctx = ExprContext {
            coords: &coords,
            params: &params,
            allow: Allow::Constant,
        };
        let val = parse_constant(&v, &ctx).map_err(expr_err(*line))?;
        params.insert(k, val);
    }
    let rho = params
        .get("rho")
        .cloned()
        .ok_or_else(|| syntax(doc.line_of("params"), "parameter `rho` (mass density) is required"))?;

    let cctx = ExprContext {
        coords: &coords,
        params: &params,
        allow: Allow::Constant,
    };
    let pctx = ExprContext {
        allow: Allow::Poly,
        ..cctx
    };
    let octx = ExprContext {
        allow: Allow::Operator,
        ..cctx
    };

    let mut lo = vec![None; ell];
    let mut hi = vec![None; ell];
    for (line, t) in doc.required("domain")? {
        let (k, v) = key_value(*line, t)?;
        let i = coords.index_of(&k).ok_or_else(|| ModelError::Expr {
            line: *line,
            source: ExprError::UnknownCoord(k.clone()),
        })?;
        if i >= ell {
            return Err(syntax(*line, format!("`{k}` is not a distributed coordinate")));
        }
        let b = split_top_level(&v);
        let [a, c] = b.as_slice() else {
            return Err(syntax(*line, "domain bounds must read `lo, hi`"));
        };
        lo[i] = Some(parse_constant(a, &cctx).map_err(expr_err(*line))?);
        hi[i] = Some(parse_constant(c, &cctx).map_err(expr_err(*line))?);
    }
    let line_d = doc.line_of("domain");
    let lo: Vec<Rational> = lo
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| syntax(line_d, format!("no bounds for `{}`", coords.name(i)))))
        .collect::<Result<_, _>>()?;
    let hi: Vec<Rational> = hi.into_iter().map(|v| v.unwrap()).collect();
    let domain = DomainSpec::new(lo, hi).map_err(|e| syntax(line_d, e.to_string()))?;

    let section = parse_section(&doc, &cctx)?;
    if section.dims() != coords.len() - ell {
        return Err(syntax(
            doc.line_of("section"),
            format!(
                "section spans {} coordinate(s) but {} are complementary",
                section.dims(),
                coords.len() - ell
            ),
        ));
    }

    let f = parse_operator(&doc, ell, &octx)?;
    let unknowns = match doc.sections.get("unknowns") {
        Some(lines) => {
            let names: Vec<String> = lines.iter().flat_map(|(_, t)| words(t)).collect();
            if names.len() != f.n() {
                return Err(syntax(
                    doc.line_of("unknowns"),
                    format!("{} unknown names for an operator with {} columns", names.len(), f.n()),
                ));
            }
            names
        }
        None => (1..=f.n()).map(|i| format!("r{i}")).collect(),
    };
    let lambda1 = parse_poly_matrix(&doc, "lambda1", &pctx)?;
    let lambda2 = parse_poly_matrix(&doc, "lambda2", &pctx)?;
    let c = parse_constitutive(&doc, &cctx)?;
    let bd = match doc.sections.get("Bd") {
        Some(lines) => Some(parse_const_rows(lines, "Bd", doc.line_of("Bd"), &cctx)?),
        None => None,
    };

    let mut strain = StrainSpec::default();
    if let Some(lines) = doc.sections.get("strain") {
        for (line, t) in lines {
            let (k, v) = key_value(*line, t)?;
            if k != "voigt" {
                return Err(syntax(*line, format!("unknown key `{k}` in [strain]")));
            }
            strain.voigt = words(&v)
                .iter()
                .map(|w| match w.parse::<usize>() {
                    Ok(i) if (1..=6).contains(&i) => Ok(i),
                    _ => Err(syntax(*line, format!("Voigt index `{w}` not in 1..6"))),
                })
                .collect::<Result<_, _>>()?;
        }
    }
    strain.constraints = parse_constraints(&doc, &unknowns, ell)?;
    if doc.sections.contains_key("kinematics") {
        let (rows, cols, entries) = parse_op_rows(&doc, "kinematics", &octx)?;
        for (line, t) in &entries {
            if t.keys().any(|&(k, _)| k > ell) {
                return Err(syntax(*line, "derivative along a coordinate that is not distributed"));
            }
        }
        strain.kinematics = Some(OpPolyMatrix {
            rows,
            cols,
            entries: entries.into_iter().map(|(_, t)| t).collect(),
        });
    }

    Ok(KinematicModel {
        name,
        coords,
        ell,
        domain,
        section,
        params,
        unknowns,
        lambda1,
        lambda2,
        f,
        c,
        rho,
        bd,
        strain,
    })
}

fn write_rows<T>(out: &mut String, rows: usize, cols: usize, cell: impl Fn(usize, usize) -> T)
where
    T: std::fmt::Display,
{
    for i in 0..rows {
        let r: Vec<String> = (0..cols).map(|j| cell(i, j).to_string()).collect();
        let _ = writeln!(out, "{}", r.join(", "));
    }
}

/// Serializes a resolved model. Parameters and matrices are written with
/// folded rational values, so `parse_model(to_model_text(m)) == m`.
pub fn to_model_text(m: &KinematicModel) -> String {
    let mut s = String::new();
    let names: Vec<&str> = m.coords.names().collect();
    let _ = writeln!(s, "phs-model {FORMAT_VERSION}");
    let _ = writeln!(s, "name = {}\n", m.name);
    let _ = writeln!(s, "[coords]");
    let _ = writeln!(s, "names = {}", names.join(" "));
    let _ = writeln!(s, "distributed = {}", names[..m.ell].join(" "));
    if m.ell < names.len() {
        let _ = writeln!(s, "complementary = {}", names[m.ell..].join(" "));
    }
    let _ = writeln!(s, "\n[params]");
    for (k, v) in &m.params {
        let _ = writeln!(s, "{k} = {}", fmt_rational(v));
    }
    let _ = writeln!(s, "\n[domain]");
    for k in 0..m.ell {
        let _ = writeln!(
            s,
            "{} = {}, {}",
            names[k],
            fmt_rational(&m.domain.lo()[k]),
            fmt_rational(&m.domain.hi()[k])
        );
    }
    let _ = writeln!(s, "\n[section]\n{}", m.section.to_text());
    let _ = writeln!(s, "\n[unknowns]\n{}", m.unknowns.join(" "));
    let _ = writeln!(s, "\n[lambda1]");
    write_rows(&mut s, m.lambda1.rows(), m.lambda1.cols(), |i, j| m.lambda1.get(i, j).clone());
    let _ = writeln!(s, "\n[lambda2]");
    write_rows(&mut s, m.lambda2.rows(), m.lambda2.cols(), |i, j| m.lambda2.get(i, j).clone());
    let _ = writeln!(s, "\n[F]");
    write_rows(&mut s, m.f.m(), m.f.n(), |i, j| m.f.entry_text(i, j));
    let _ = writeln!(s, "\n[C]");
    write_rows(&mut s, m.c.rows(), m.c.cols(), |i, j| fmt_rational(m.c.get(i, j)));
    if let Some(bd) = &m.bd {
        let _ = writeln!(s, "\n[Bd]");
        write_rows(&mut s, bd.rows(), bd.cols(), |i, j| fmt_rational(bd.get(i, j)));
    }
    if !m.strain.voigt.is_empty() {
        let v: Vec<String> = m.strain.voigt.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "\n[strain]\nvoigt = {}", v.join(" "));
    }
    if !m.strain.constraints.is_empty() {
        let _ = writeln!(s, "\n[constraints]");
        for c in &m.strain.constraints {
            let d = if c.order == 1 {
                format!("d{}", c.axis)
            } else {
                format!("d{}^{}", c.axis, c.order)
            };
            let _ = writeln!(s, "{} = {d} {}", m.unknowns[c.target], m.unknowns[c.source]);
        }
    }
    if let Some(k) = &m.strain.kinematics {
        let _ = writeln!(s, "\n[kinematics]");
        write_rows(&mut s, k.rows, k.cols, |i, j| format_terms(k.get(i, j)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIMOSHENKO: &str = "\
phs-model 1
name = beam
[coords]
distributed = z1
[params]
E = 2
G = 1
kappa = 5/6
rho = 1
b = 1
h = 1
[domain]
z1 = 0, 1
[section]
rectangle(b, h)
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
[strain]
voigt = 1 5
";

    #[test]
    fn reads_timoshenko() {
        let m = parse_model(TIMOSHENKO).unwrap();
        assert_eq!((m.n(), m.m(), m.d(), m.order()), (2, 2, 2, 1));
        assert_eq!(m.unknowns, ["r1", "r2"]);
        assert_eq!(m.c.get(1, 1), &crate::rational::rat(5, 6));
    }

    #[test]
    fn round_trips() {
        let m = parse_model(TIMOSHENKO).unwrap();
        let again = parse_model(&to_model_text(&m)).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn rejects_mixed_derivatives() {
        let bad = TIMOSHENKO.replace("-1, d1\n", "-1, d1*d2\n").replace("distributed = z1", "distributed = z1 z2")
            .replace("z1 = 0, 1", "z1 = 0, 1\nz2 = 0, 1")
            .replace("rectangle(b, h)", "interval(h)");
        let err = parse_model(&bad).unwrap_err();
        assert!(matches!(err, ModelError::Expr { source: ExprError::MixedDerivative(1, 2), .. }), "{err}");
    }

    #[test]
    fn rejects_unbound_and_unknown() {
        let err = parse_model(&TIMOSHENKO.replace("diag(E, kappa*G)", "diag(E, k*G)")).unwrap_err();
        assert!(matches!(err, ModelError::Expr { source: ExprError::Unbound(_), .. }));
        let err = parse_model(&TIMOSHENKO.replace("-z3, 0\n0, 1", "-z4, 0\n0, 1")).unwrap_err();
        assert!(matches!(err, ModelError::Expr { source: ExprError::UnknownCoord(_), .. }));
        let err = parse_model(&TIMOSHENKO.replace("phs-model 1", "phs-model 9")).unwrap_err();
        assert!(err.to_string().contains("version"));
        let err = parse_model(&TIMOSHENKO.replace("kappa = 5/6", "kappa = 0.83")).unwrap_err();
        assert!(err.to_string().contains("decimal"));
    }
}
