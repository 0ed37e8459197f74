//! Executable structural checks over the builtin zoo: the integration by
//! parts identity, mutation detection, energy balance, model reductions and
//! positivity of the energy matrices.

mod mutations;

use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diff_op::{boundary_term, ibp_residual, volume_term, DiffOpMatrix, DomainSpec};
use crate::matrix::RatMatrix;
use crate::model::builtins::{reddy_plate_with_alpha, torsion_two_strain};
use crate::model::{builtin_model, builtin_names, default_params, physical_params, KinematicModel, Section};
use crate::phs::{
    assemble_phs, mass_matrix_unchecked, stiffness_matrix_unchecked, PHSystem,
};
use crate::poly::{random_poly, Poly};
use crate::rational::{fmt_rational, Rational};

pub use mutations::{mutation_catalogue, Mutation};

pub const REPORT_FORMAT: &str = "phs-forge-verify";
pub const REPORT_VERSION: u32 = 1;
pub const DEFAULT_TRIALS: usize = 20;

#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Outcome of one check.
#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub id: String,
    pub kind: &'static str,
    pub subject: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Wall time; kept out of the JSON report so that it stays byte-stable.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CheckReport {
    fn new(kind: &'static str, id: String, subject: impl Into<String>) -> Self {
        CheckReport {
            id,
            kind,
            subject: subject.into(),
            status: Status::Pass,
            witness: None,
            reason: None,
            detail: None,
            elapsed: Duration::ZERO,
        }
    }

    fn fail(mut self, witness: impl Into<String>) -> Self {
        self.status = Status::Fail;
        self.witness = Some(witness.into());
        self
    }

    fn skip(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Skipped;
        self.reason = Some(reason.into());
        self
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    fn check(self, failure: Option<String>) -> Self {
        match failure {
            Some(w) => self.fail(w),
            None => self,
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Serialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub format: &'static str,
    pub version: u32,
    pub seed: u64,
    pub trials: usize,
    pub summary: Summary,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    fn new(seed: u64, trials: usize, mut checks: Vec<CheckReport>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let mut summary = Summary {
            total: checks.len(),
            ..Summary::default()
        };
        for c in &checks {
            match c.status {
                Status::Pass => summary.passed += 1,
                Status::Fail => summary.failed += 1,
                Status::Skipped => summary.skipped += 1,
            }
        }
        SuiteReport {
            format: REPORT_FORMAT,
            version: REPORT_VERSION,
            seed,
            trials,
            summary,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn get(&self, id: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Pretty JSON, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

/// 64-bit FNV-1a; gives each subject a stable random stream.
fn stream_id(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Deterministic generator for one `(label, trial)` pair.
pub fn field_rng(seed: u64, label: &str, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(stream_id(label));
    rng
}

/// Random polynomial fields in the distributed coordinates, coefficients in
/// `-3..=3`.
pub fn random_fields(m: &KinematicModel, count: usize, degree: u32, rng: &mut ChaCha8Rng) -> Vec<Poly> {
    let vars: Vec<usize> = (0..m.ell).collect();
    (0..count)
        .map(|_| random_poly(&m.coords, &vars, degree, rng))
        .collect()
}

fn fmt_fields(f: &[Poly]) -> String {
    let parts: Vec<String> = f.iter().map(|p| p.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Integration by parts residual on `trials` random pairs per model. Field
/// degree defaults to `N + 2`.
pub fn check_lemma1(
    models: &[&KinematicModel],
    trials: usize,
    max_degree: Option<u32>,
    seed: u64,
) -> Vec<CheckReport> {
    assert!(trials >= 1, "at least one trial");
    let jobs: Vec<(&KinematicModel, usize)> = models
        .iter()
        .flat_map(|m| (0..trials).map(move |t| (*m, t)))
        .collect();
    jobs.into_par_iter()
        .map(|(m, t)| {
            let start = Instant::now();
            let degree = max_degree.unwrap_or(m.order() as u32 + 2);
            let mut rng = field_rng(seed, &m.name, t);
            let v = random_fields(m, m.m(), degree, &mut rng);
            let w = random_fields(m, m.n(), degree, &mut rng);
            let id = format!("lemma1/{}/{t:02}", m.name);
            let mut r = CheckReport::new("lemma1", id, m.name.clone());
            r = match ibp_residual(&m.f, &v, &w, &m.domain) {
                Ok(res) if res.is_zero() => r,
                Ok(res) => r.fail(format!(
                    "residual {} for v = {}, w = {}",
                    fmt_rational(&res),
                    fmt_fields(&v),
                    fmt_fields(&w)
                )),
                Err(e) => r.fail(e.to_string()),
            };
            r.elapsed = start.elapsed();
            r
        })
        .collect()
}

/// `xᵀ A y` summed entry by entry.
fn quad(x: &[Poly], a: &RatMatrix, y: &[Poly]) -> Poly {
    let mut acc = Poly::zero(x[0].coords());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let c = a.get(i, j);
            if !c.is_zero() {
                acc = &acc + &(&x[i] * &y[j]).scale(c);
            }
        }
    }
    acc
}

fn mat_apply(a: &RatMatrix, x: &[Poly]) -> Vec<Poly> {
    (0..a.rows())
        .map(|i| {
            let mut acc = Poly::zero(x[0].coords());
            for (j, xj) in x.iter().enumerate() {
                let c = a.get(i, j);
                if !c.is_zero() {
                    acc = &acc + &xj.scale(c);
                }
            }
            acc
        })
        .collect()
}

/// `dH/dt` differentiated straight from `H = ½∫ pᵀM⁻¹p + εᵀKε` along the
/// flow `ṗ = -F*(Kε)`, `ε̇ = F(M⁻¹p)`, minus the boundary pairing of the
/// co-energies. Powers of π cancel between the two factors of every term.
fn energy_residual(
    mass_inv: &RatMatrix,
    stiffness: &RatMatrix,
    f: &DiffOpMatrix,
    dom: &DomainSpec,
    p: &[Poly],
    eps: &[Poly],
) -> Result<Rational, crate::diff_op::DiffOpError> {
    let e_p = mat_apply(mass_inv, p);
    let e_eps = mat_apply(stiffness, eps);
    let p_dot: Vec<Poly> = f.formal_adjoint().apply(&e_eps)?.into_iter().map(|q| -q).collect();
    let eps_dot = f.apply(&e_p)?;
    let density = &(&quad(&p_dot, mass_inv, p) + &quad(p, mass_inv, &p_dot))
        + &(&quad(&eps_dot, stiffness, eps) + &quad(eps, stiffness, &eps_dot));
    let dh = dom.integrate(&density)? / Rational::from_integer(2.into());
    let form = f.boundary_form();
    let pairing = boundary_term(f, |n| form.assemble(n), &e_eps, &e_p, dom)?;
    Ok(dh - pairing)
}

/// Energy balance on `trials` random `(p, ε)` pairs: the rate of change of
/// the Hamiltonian equals the boundary power exactly.
pub fn check_energy_structure(s: &PHSystem, trials: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let m = &s.model;
    let degree = m.order() as u32 + 2;
    let mut r = CheckReport::new("energy", format!("energy/{}", m.name), m.name.clone());
    for t in 0..trials {
        let mut rng = field_rng(seed, &format!("energy/{}", m.name), t);
        let p = random_fields(m, m.n(), degree, &mut rng);
        let eps = random_fields(m, m.m(), degree, &mut rng);
        match energy_residual(&s.mass_inverse.q, &s.stiffness.q, &s.f, &m.domain, &p, &eps) {
            Ok(res) if res.is_zero() => {}
            Ok(res) => {
                r = r.fail(format!(
                    "trial {t}: dH/dt minus boundary power = {} for p = {}, eps = {}",
                    fmt_rational(&res),
                    fmt_fields(&p),
                    fmt_fields(&eps)
                ));
                break;
            }
            Err(e) => {
                r = r.fail(e.to_string());
                break;
            }
        }
    }
    r.elapsed = start.elapsed();
    r
}

/// Operator with the listed rows and columns removed.
pub fn delete_rows_cols(d: &DiffOpMatrix, rows: &[usize], cols: &[usize]) -> DiffOpMatrix {
    let keep_r: Vec<usize> = (0..d.m()).filter(|i| !rows.contains(i)).collect();
    let keep_c: Vec<usize> = (0..d.n()).filter(|i| !cols.contains(i)).collect();
    DiffOpMatrix::new(
        keep_r.len(),
        keep_c.len(),
        d.ell(),
        d.p0().select(&keep_r, &keep_c),
        d.terms().iter().map(|(&k, c)| (k, c.select(&keep_r, &keep_c))),
    )
    .expect("selection preserves shapes")
}

fn op_text(d: &DiffOpMatrix) -> Vec<Vec<String>> {
    (0..d.m())
        .map(|r| (0..d.n()).map(|c| d.entry_text(r, c)).collect())
        .collect()
}

fn limit_reddy_mindlin() -> Option<String> {
    let p = default_params("reddy_plate").ok()?;
    let reddy = match reddy_plate_with_alpha(&p, Rational::zero()) {
        Ok(m) => m,
        Err(e) => return Some(e.to_string()),
    };
    let mut mp = default_params("mindlin_plate").ok()?;
    mp.retain(|k, _| p.contains_key(k));
    let mindlin = match builtin_model("mindlin_plate", &mp).map_err(|e| e.to_string()).and_then(|m| {
        assemble_phs(&m).map_err(|e| e.to_string())
    }) {
        Ok(s) => s,
        Err(e) => return Some(e),
    };
    let (m, k) = match (mass_matrix_unchecked(&reddy), stiffness_matrix_unchecked(&reddy)) {
        (Ok(m), Ok(k)) => (m.q, k.q),
        (Err(e), _) | (_, Err(e)) => return Some(e.to_string()),
    };
    if m.block(0, 0, 3, 3) != mindlin.mass.q {
        return Some(format!("leading 3x3 mass block {} differs from Mindlin {}", m.block(0, 0, 3, 3), mindlin.mass.q));
    }
    if k.block(0, 0, 5, 5) != mindlin.stiffness.q {
        return Some("leading 5x5 stiffness block differs from Mindlin".into());
    }
    if !(m.block(3, 0, 2, 5).is_zero() && m.block(0, 3, 5, 2).is_zero()) {
        return Some("warping rows/columns of the mass matrix do not vanish".into());
    }
    if !(k.block(5, 0, 3, 8).is_zero() && k.block(0, 5, 8, 3).is_zero()) {
        return Some("higher-order rows/columns of the stiffness matrix do not vanish".into());
    }
    let sub = delete_rows_cols(&reddy.f, &[5, 6, 7], &[3, 4]);
    if op_text(&sub) != op_text(&mindlin.f) {
        return Some("first-order block of F differs from Mindlin".into());
    }
    None
}

fn limit_rayleigh_eb() -> Option<String> {
    let p = default_params("rayleigh_beam").ok()?;
    let rayleigh = match builtin_model("rayleigh_beam", &p).map_err(|e| e.to_string()).and_then(|m| {
        assemble_phs(&m).map_err(|e| e.to_string())
    }) {
        Ok(s) => s,
        Err(e) => return Some(e),
    };
    let m = &rayleigh.model;
    let (b, h) = match &m.section {
        Section::Rectangle { b, h } => (b.clone(), h.clone()),
        other => return Some(format!("unexpected Rayleigh section {}", other.to_text())),
    };
    let area = &b * &h;
    let second = &b * &h * &h * &h / Rational::from_integer(12.into());
    let mut ep = default_params("euler_bernoulli").ok()?;
    ep.insert("A".into(), area);
    ep.insert("I".into(), second);
    for key in ["E", "rho", "L"] {
        if let Some(v) = m.params.get(key) {
            ep.insert(key.into(), v.clone());
        }
    }
    let eb = match builtin_model("euler_bernoulli", &ep).map_err(|e| e.to_string()).and_then(|m| {
        assemble_phs(&m).map_err(|e| e.to_string())
    }) {
        Ok(s) => s,
        Err(e) => return Some(e),
    };
    let reduced = delete_rows_cols(&rayleigh.j, &[0], &[0]);
    let expected = [["0", "-d1^2"], ["d1^2", "0"]];
    let got = op_text(&reduced);
    if got != expected {
        return Some(format!("reduced Rayleigh J = {got:?}, expected {expected:?}"));
    }
    if got != op_text(&eb.j) {
        return Some(format!("Euler-Bernoulli J = {:?}", op_text(&eb.j)));
    }
    let four_k = rayleigh.stiffness.q.scale(&Rational::from_integer(4.into()));
    if four_k != eb.stiffness.q {
        return Some(format!(
            "rescaled Rayleigh stiffness {} differs from Euler-Bernoulli {}",
            four_k, eb.stiffness.q
        ));
    }
    if rayleigh.mass.q.select(&[1], &[1]) != eb.mass.q {
        return Some("translational mass differs".into());
    }
    None
}

fn limit_torsion() -> Option<String> {
    let p = default_params("torsion").ok()?;
    let two = match torsion_two_strain(&p) {
        Ok(m) => m,
        Err(e) => return Some(e.to_string()),
    };
    let red = match builtin_model("torsion", &p).map_err(|e| e.to_string()).and_then(|m| {
        assemble_phs(&m).map_err(|e| e.to_string())
    }) {
        Ok(s) => s,
        Err(e) => return Some(e),
    };
    let k2 = match assemble_phs(&two) {
        Ok(s) => s.stiffness,
        Err(e) => return Some(e.to_string()),
    };
    if k2.pi_pow != red.stiffness.pi_pow {
        return Some("powers of pi differ".into());
    }
    let (k11, k22) = (k2.q.get(0, 0), k2.q.get(1, 1));
    if !k2.q.get(0, 1).is_zero() || k11 != k22 {
        return Some(format!("two-strain stiffness {} is not G I_t times the identity", k2.q));
    }
    if &(k11 + k22) != red.stiffness.q.get(0, 0) {
        return Some(format!(
            "G I_t + G I_t = {} but reduced stiffness is {}",
            fmt_rational(&(k11 + k22)),
            fmt_rational(red.stiffness.q.get(0, 0))
        ));
    }
    let rows: Vec<_> = op_text(&two.f).into_iter().flatten().collect();
    if rows != ["d1", "d1"] || op_text(&red.f) != [["d1"]] {
        return Some("torsion operators do not aggregate".into());
    }
    None
}

/// Named reduction checks with the builtins each one involves.
pub fn limit_checks() -> Vec<(&'static str, &'static [&'static str], fn() -> Option<String>)> {
    vec![
        ("reddy-mindlin", &["reddy_plate", "mindlin_plate"], limit_reddy_mindlin),
        ("rayleigh-euler-bernoulli", &["rayleigh_beam", "euler_bernoulli"], limit_rayleigh_eb),
        ("torsion-two-strain", &["torsion"], limit_torsion),
    ]
}

pub fn check_limits_and_reductions() -> Vec<CheckReport> {
    run_limits(|_| true)
}

fn run_limits(include: impl Fn(&[&str]) -> bool) -> Vec<CheckReport> {
    limit_checks()
        .into_iter()
        .filter(|(_, models, _)| include(models))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(name, models, f)| {
            let start = Instant::now();
            let mut r = CheckReport::new("limit", format!("limits/{name}"), models.join("+")).check(f());
            r.elapsed = start.elapsed();
            r
        })
        .collect()
}

/// Mass and stiffness positivity at physical parameter values.
pub fn check_spd(name: &str) -> CheckReport {
    let start = Instant::now();
    let r = CheckReport::new("spd", format!("spd/{name}"), name);
    let mut r = match physical_params(name)
        .and_then(|p| builtin_model(name, &p))
        .map_err(|e| e.to_string())
        .and_then(|m| assemble_phs(&m).map_err(|e| e.to_string()))
    {
        Ok(s) => r.with_detail(format!(
            "M leading minors {}; K leading minors {}",
            minors(&s.mass.q),
            minors(&s.stiffness.q)
        )),
        Err(e) => r.fail(e),
    };
    r.elapsed = start.elapsed();
    r
}

fn minors(q: &RatMatrix) -> String {
    let signs: Vec<&str> = q
        .leading_minors()
        .iter()
        .map(|v| if v > &Rational::zero() { "+" } else if v.is_zero() { "0" } else { "-" })
        .collect();
    signs.concat()
}

/// Mutation detection: a mutation passes this check when at least one of
/// the random trials exposes a nonzero residual.
pub fn check_mutation(mutation: &Mutation, trials: usize, seed: u64) -> CheckReport {
    let start = Instant::now();
    let id = format!("mutation/{}", mutation.name);
    let r = CheckReport::new("mutation", id, mutation.subject);
    let model = match builtin_model(mutation.subject, &default_params(mutation.subject).unwrap_or_default()) {
        Ok(m) => m,
        Err(e) => return r.fail(e.to_string()),
    };
    let degree = model.order() as u32 + 2;
    let mut found = None;
    for t in 0..trials {
        let mut rng = field_rng(seed, &model.name, t);
        let v = random_fields(&model, model.m(), degree, &mut rng);
        let w = random_fields(&model, model.n(), degree, &mut rng);
        match mutation.residual(&model, &v, &w) {
            Ok(res) if !res.is_zero() => {
                found = Some((t, res));
                break;
            }
            Ok(_) => {}
            Err(e) => {
                let mut r = r.fail(e.to_string());
                r.elapsed = start.elapsed();
                return r;
            }
        }
    }
    let mut r = match found {
        Some((t, res)) => r.with_detail(format!("detected at trial {t}, residual {}", fmt_rational(&res))),
        None => r.fail(format!("mutation survived {trials} trials")),
    };
    r.elapsed = start.elapsed();
    r
}

/// Which checks to run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Builtin names; empty means all.
    pub models: Vec<String>,
    pub seed: u64,
    pub trials: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            models: Vec::new(),
            seed: 0,
            trials: DEFAULT_TRIALS,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown builtin model `{0}`")]
pub struct UnknownModel(pub String);

/// Runs the suite. For a model subset only the reductions and mutations
/// that involve one of the chosen models are included.
pub fn run_suite(cfg: &VerifyConfig) -> Result<SuiteReport, UnknownModel> {
    let all = builtin_names();
    let names: Vec<&str> = if cfg.models.is_empty() {
        all.clone()
    } else {
        cfg.models
            .iter()
            .map(|n| {
                all.iter()
                    .copied()
                    .find(|a| a == n)
                    .ok_or_else(|| UnknownModel(n.clone()))
            })
            .collect::<Result<_, _>>()?
    };
    let chosen = |m: &str| names.contains(&m);

    let built: Vec<(String, Result<KinematicModel, String>)> = names
        .par_iter()
        .map(|n| {
            let m = default_params(n).and_then(|p| builtin_model(n, &p));
            (n.to_string(), m.map_err(|e| e.to_string()))
        })
        .collect();

    let mut checks = Vec::new();
    let ok: Vec<&KinematicModel> = built.iter().filter_map(|(_, m)| m.as_ref().ok()).collect();
    for (n, m) in &built {
        if let Err(e) = m {
            checks.push(CheckReport::new("lemma1", format!("lemma1/{n}"), n.clone()).fail(e.clone()));
        }
    }
    checks.extend(check_lemma1(&ok, cfg.trials, None, cfg.seed));

    let energy: Vec<CheckReport> = ok
        .par_iter()
        .map(|m| match assemble_phs(m) {
            Ok(s) => check_energy_structure(&s, cfg.trials, cfg.seed),
            Err(e) => CheckReport::new("energy", format!("energy/{}", m.name), m.name.clone()).fail(e.to_string()),
        })
        .collect();
    checks.extend(energy);

    checks.extend(names.par_iter().map(|n| check_spd(n)).collect::<Vec<_>>());

    checks.extend(run_limits(|models| models.iter().any(|m| chosen(m))));

    let muts: Vec<Mutation> = mutation_catalogue()
        .into_iter()
        .filter(|m| chosen(m.subject))
        .collect();
    checks.extend(
        muts.par_iter()
            .map(|m| check_mutation(m, cfg.trials, cfg.seed))
            .collect::<Vec<_>>(),
    );

    Ok(SuiteReport::new(cfg.seed, cfg.trials, checks))
}

/// Suite for a model read from a file: identity, energy and positivity at
/// the file's own parameter values. Reductions and mutations are defined
/// for builtins only and are listed as skipped.
pub fn run_model_suite(m: &KinematicModel, seed: u64, trials: usize) -> SuiteReport {
    let mut checks = check_lemma1(&[m], trials, None, seed);
    let name = m.name.clone();
    match assemble_phs(m) {
        Ok(s) => {
            checks.push(check_energy_structure(&s, trials, seed));
            checks.push(CheckReport::new("spd", format!("spd/{name}"), name.clone()).with_detail(format!(
                "M leading minors {}; K leading minors {}",
                minors(&s.mass.q),
                minors(&s.stiffness.q)
            )));
        }
        Err(e) => {
            checks.push(CheckReport::new("spd", format!("spd/{name}"), name.clone()).fail(e.to_string()));
        }
    }
    checks.push(
        CheckReport::new("limit", "limits/*".into(), name.clone())
            .skip("model reductions are defined between builtin models"),
    );
    checks.push(
        CheckReport::new("mutation", "mutation/*".into(), name)
            .skip("mutation fixtures are defined on builtin models"),
    );
    SuiteReport::new(seed, trials, checks)
}

pub(crate) fn residual_with(
    f_volume: &DiffOpMatrix,
    adjoint: &DiffOpMatrix,
    f_jet: &DiffOpMatrix,
    q: impl Fn(&[Rational]) -> RatMatrix,
    v: &[Poly],
    w: &[Poly],
    dom: &DomainSpec,
) -> Result<Rational, crate::diff_op::DiffOpError> {
    Ok(volume_term(f_volume, adjoint, v, w, dom)? - boundary_term(f_jet, q, v, w, dom)?)
}

#[cfg(test)]
mod tests;
