use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context as _};
use phs_core::model::builtins::builtin_params;
use phs_core::model::{builtin_model, builtin_names, default_params, to_model_text};
use phs_core::phs::{export_csv, export_json};
use phs_core::simulate::io::{initial_state, parse_input, write_energy_csv, write_trajectory_csv};
use phs_core::simulate::{
    discretize, simulate as run, supported_layout, BoundaryConditions, GridSpec, Inputs, SimConfig, SimError,
};
use phs_core::verify::{run_model_suite, run_suite, Status, SuiteReport, VerifyConfig};
use phs_core::{assemble_phs, DiffOpMatrix, KinematicModel, PHSystem, PhsError};

use crate::source::SourceArgs;

/// An error with the process exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn invalid(error: anyhow::Error) -> Self {
        CliError { code: 2, error }
    }

    fn runtime(error: anyhow::Error) -> Self {
        CliError { code: 1, error }
    }

    fn sim(e: SimError) -> Self {
        let code = match e {
            SimError::Unsupported(_) => 3,
            SimError::Solver(_) => 1,
            _ => 2,
        };
        CliError { code, error: e.into() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::runtime(e.into())
    }
}

pub type CmdResult = Result<ExitCode, CliError>;

pub struct Context {
    pub out_dir: PathBuf,
}

impl Context {
    fn resolve(&self, p: &Path) -> PathBuf {
        self.out_dir.join(p)
    }

    /// Opens `p` for writing, `-` meaning stdout.
    fn create(&self, p: &Path) -> Result<Box<dyn Write>, CliError> {
        if p == Path::new("-") {
            return Ok(Box::new(io::stdout().lock()));
        }
        let path = self.resolve(p);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(CliError::runtime)?;
        }
        let f = File::create(&path)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(CliError::runtime)?;
        Ok(Box::new(BufWriter::new(f)))
    }

    fn write_text(&self, p: &Path, text: &str) -> Result<(), CliError> {
        let mut w = self.create(p)?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

fn assemble(m: &KinematicModel) -> Result<PHSystem, CliError> {
    assemble_phs(m).map_err(|e| match e {
        PhsError::NotPositive { .. } | PhsError::NotSymmetric { .. } | PhsError::Model(_) => {
            CliError::invalid(anyhow!("{}: {e}", m.name))
        }
        PhsError::Normal(_) => CliError::runtime(e.into()),
    })
}

pub fn list_models() -> CmdResult {
    println!("{:<20} {:>2} {:>2} {:>2} {:>2} {:>2}  {:<9} parameters", "name", "l", "N", "n", "m", "d", "simulate");
    for name in builtin_names() {
        let m = default_params(name)
            .and_then(|p| builtin_model(name, &p))
            .map_err(|e| CliError::runtime(e.into()))?;
        let s = assemble(&m)?;
        let sim = if supported_layout(&s).is_ok() { "yes" } else { "symbolic" };
        let params: Vec<String> = builtin_params(name)
            .map_err(|e| CliError::runtime(e.into()))?
            .into_iter()
            .map(|(p, required)| if required { p.to_string() } else { format!("[{p}]") })
            .collect();
        println!(
            "{name:<20} {:>2} {:>2} {:>2} {:>2} {:>2}  {sim:<9} {}",
            m.ell,
            m.order(),
            m.n(),
            m.m(),
            m.d(),
            params.join(" ")
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn render_operator(d: &DiffOpMatrix) -> String {
    let cells: Vec<Vec<String>> = (0..d.m()).map(|i| (0..d.n()).map(|j| d.entry_text(i, j)).collect()).collect();
    let w = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
    cells
        .iter()
        .map(|row| {
            let padded: Vec<String> = row.iter().map(|s| format!("{s:>w$}")).collect();
            format!("[ {} ]\n", padded.join("  "))
        })
        .collect()
}

fn summary(s: &PHSystem) -> String {
    let m = &s.model;
    let mut out = format!(
        "{}: n={} m={} d={} N={} l={}\nunknowns: {}\nstrains: {}\n",
        m.name,
        m.n(),
        m.m(),
        m.d(),
        m.order(),
        m.ell,
        m.unknowns.join(", "),
        s.labels.strains.join(", ")
    );
    out += &format!("M =\n{}K =\n{}F =\n{}J =\n{}", s.mass, s.stiffness, render_operator(&s.f), render_operator(&s.j));
    if let Some(bd) = &s.bd {
        out += &format!("Bd =\n{bd}");
    }
    out
}

pub fn build(ctx: &Context, src: &SourceArgs, out: Option<&Path>) -> CmdResult {
    let m = src.load()?;
    let s = assemble(&m)?;
    let default = PathBuf::from(format!("{}.json", m.name));
    let out = out.unwrap_or(&default);
    let text = summary(&s);
    if out == Path::new("-") {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    ctx.write_text(out, &export_json(&s))?;
    if out != Path::new("-") {
        println!("wrote {}", ctx.resolve(out).display());
    }
    Ok(ExitCode::SUCCESS)
}

pub struct VerifyOptions {
    pub models: Vec<String>,
    pub file: Option<PathBuf>,
    pub seed: u64,
    pub trials: usize,
    pub json: Option<PathBuf>,
}

fn print_report(r: &SuiteReport) {
    for c in &r.checks {
        let (tag, note) = match c.status {
            Status::Pass => ("pass", c.detail.as_deref()),
            Status::Fail => ("FAIL", c.witness.as_deref()),
            Status::Skipped => ("skip", c.reason.as_deref()),
        };
        match note {
            Some(n) => println!("{tag:<5} {}  {n}", c.id),
            None => println!("{tag:<5} {}", c.id),
        }
    }
    let s = r.summary;
    println!("{} checks: {} passed, {} failed, {} skipped (seed {})", s.total, s.passed, s.failed, s.skipped, r.seed);
}

pub fn verify(ctx: &Context, o: &VerifyOptions) -> CmdResult {
    let report = match &o.file {
        Some(path) => {
            let src = SourceArgs {
                builtin: None,
                params: Vec::new(),
                physical: false,
                file: Some(path.clone()),
            };
            run_model_suite(&src.load()?, o.seed, o.trials)
        }
        None => run_suite(&VerifyConfig {
            models: o.models.clone(),
            seed: o.seed,
            trials: o.trials,
        })
        .map_err(|e| CliError::invalid(e.into()))?,
    };
    print_report(&report);
    if let Some(p) = &o.json {
        ctx.write_text(p, &report.to_json())?;
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn export(ctx: &Context, src: &SourceArgs, json: Option<&Path>, csv: Option<&Path>, model_text: Option<&Path>) -> CmdResult {
    let m = src.load()?;
    let s = assemble(&m)?;
    let json = match (json, csv, model_text) {
        (None, None, None) => Some(Path::new("-")),
        (j, _, _) => j,
    };
    if let Some(p) = json {
        ctx.write_text(p, &export_json(&s))?;
    }
    if let Some(dir) = csv {
        let files = export_csv(&s, &ctx.resolve(dir)).map_err(|e| CliError::runtime(e.into()))?;
        for f in files {
            eprintln!("wrote {}", f.display());
        }
    }
    if let Some(p) = model_text {
        ctx.write_text(p, &to_model_text(&m))?;
    }
    Ok(ExitCode::SUCCESS)
}

pub struct SimulateOptions {
    pub cells: String,
    pub dt: f64,
    pub steps: usize,
    pub bc: String,
    pub inputs: Vec<String>,
    pub init: String,
    pub record_every: usize,
    pub out: Option<PathBuf>,
    pub energy: Option<PathBuf>,
}

pub fn simulate(ctx: &Context, src: &SourceArgs, o: &SimulateOptions) -> CmdResult {
    let m = src.load()?;
    let s = assemble(&m)?;
    supported_layout(&s).map_err(CliError::sim)?;
    let grid = GridSpec::parse(&o.cells).map_err(CliError::sim)?;
    let bcs = BoundaryConditions::parse(&o.bc).map_err(CliError::sim)?;
    let sys = discretize(&s, &grid, &bcs).map_err(CliError::sim)?;
    let mut inputs = Inputs::none();
    for spec in &o.inputs {
        parse_input(spec, &mut inputs).map_err(CliError::sim)?;
    }
    let x0 = initial_state(&sys, &o.init).map_err(CliError::sim)?;
    let cfg = SimConfig {
        dt: o.dt,
        steps: o.steps,
        record_every: o.record_every,
    };
    let result = run(&sys, &x0, &cfg, &inputs).map_err(CliError::sim)?;

    if let Some(p) = &o.out {
        write_trajectory_csv(ctx.create(p)?, &sys, &result.snapshots).map_err(|e| CliError::runtime(e.into()))?;
    }
    if let Some(p) = &o.energy {
        write_energy_csv(ctx.create(p)?, &result.energy).map_err(|e| CliError::runtime(e.into()))?;
    }
    let log = &result.energy;
    let (h0, h1) = (log.rows[0].h, log.rows[log.len() - 1].h);
    println!(
        "{}: {} unknowns, {} steps of dt={:e}; H(0)={:.12e} H(T)={:.12e} drift={:.3e} max|residual|={:.3e} max scaled residual={:.3e}",
        sys.name,
        sys.dim(),
        o.steps,
        o.dt,
        h0,
        h1,
        log.relative_drift(),
        log.max_abs_residual(),
        log.max_scaled_residual()
    );
    Ok(ExitCode::SUCCESS)
}
