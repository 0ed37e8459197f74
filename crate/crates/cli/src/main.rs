//! `phs-forge`: compile, verify, export and simulate port-Hamiltonian models
//! of linear elastic structures.

mod commands;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use source::SourceArgs;

const GRAMMAR: &str = "\
Model files use grammar version 1:

  phs-model 1
  name = timoshenko
  [coords]       names = z1 z2 z3 / distributed = z1 / complementary = z2 z3
  [params]       NAME = expr, one per line, evaluated in order; rho is required
  [domain]       z1 = lo, hi for each distributed coordinate
  [section]      none | interval(h) | rectangle(b, h) | circle(R) | generic(A[, I])
  [unknowns]     optional names of the generalized displacements
  [lambda1]      3 rows of polynomials in the complementary coordinates
  [lambda2]      d rows
  [F]            m rows of operator entries such as d1, d1^2, -1, 2*d2 - 1, 0
  [C]            a preset call (scalar, shear, string_tension, plane_stress,
                 iso3d, reddy_block, mindlin_block) or d rows of constants
  [Bd]           optional n rows of constants
  [strain]       voigt = Voigt components represented by lambda2 F r
  [constraints]  optional name = dK[^i] name relations between unknowns
  [kinematics]   optional 3 rows of operator entries replacing lambda1 for strains

Entries within a row are comma separated, '#' starts a comment and every
number is an exact rational. `phs-forge export --builtin NAME --model-text
FILE` writes any builtin in this format.

Exit status: 0 success, 1 failed checks or I/O error, 2 invalid model,
parameters or arguments, 3 model outside the simulator scope.";

#[derive(Parser, Debug)]
#[command(name = "phs-forge", version, about, after_long_help = GRAMMAR)]
struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, env = "PHS_FORGE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the builtin models with their dimensions and parameters.
    ListModels,
    /// Compile a model, print a summary and write the JSON export.
    #[command(after_long_help = GRAMMAR)]
    Build(BuildArgs),
    /// Run the structural check suite.
    Verify(VerifyArgs),
    /// Write a compiled system as JSON, CSV matrices or model text.
    #[command(after_long_help = GRAMMAR)]
    Export(ExportArgs),
    /// Discretize a compiled system and integrate it in time.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// JSON output path ("-" for stdout); defaults to NAME.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Builtin to check; repeatable.
    #[arg(long = "model", value_name = "NAME", conflicts_with_all = ["all", "file"])]
    models: Vec<String>,
    /// Check every builtin (the default).
    #[arg(long)]
    all: bool,
    /// Check a model file at its own parameter values.
    #[arg(long, conflicts_with = "all")]
    file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random field pairs per identity check.
    #[arg(long, default_value_t = phs_core::verify::DEFAULT_TRIALS)]
    trials: usize,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// JSON output path ("-" for stdout); stdout when no other output is given.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Directory for float CSV renderings of the matrices.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the resolved model in the text format.
    #[arg(long)]
    model_text: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Cells per axis: N or N,M.
    #[arg(long)]
    cells: String,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    steps: usize,
    /// Face conditions, e.g. left=clamped,right=free; unlisted faces are free.
    #[arg(long, default_value = "")]
    bc: String,
    /// FACE=v1,..,vn or distributed=u1,..; append @sin:OMEGA for a sine profile. Repeatable.
    #[arg(long = "input", value_name = "SPEC")]
    inputs: Vec<String>,
    /// zero, random:SEED or mode:K.
    #[arg(long, default_value = "random:1")]
    init: String,
    /// Snapshot cadence in steps; 0 keeps the initial and final states only.
    #[arg(long, default_value_t = 0)]
    record_every: usize,
    /// Trajectory CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Energy CSV.
    #[arg(long)]
    energy: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Context { out_dir: cli.out_dir };
    let result = match cli.command {
        Command::ListModels => commands::list_models(),
        Command::Build(a) => commands::build(&ctx, &a.source, a.out.as_deref()),
        Command::Verify(a) => commands::verify(
            &ctx,
            &commands::VerifyOptions {
                models: a.models,
                file: a.file,
                seed: a.seed,
                trials: a.trials,
                json: a.json,
            },
        ),
        Command::Export(a) => commands::export(&ctx, &a.source, a.json.as_deref(), a.csv.as_deref(), a.model_text.as_deref()),
        Command::Simulate(a) => commands::simulate(
            &ctx,
            &a.source,
            &commands::SimulateOptions {
                cells: a.cells,
                dt: a.dt,
                steps: a.steps,
                bc: a.bc,
                inputs: a.inputs,
                init: a.init,
                record_every: a.record_every,
                out: a.out,
                energy: a.energy,
            },
        ),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
