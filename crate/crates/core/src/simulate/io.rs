//! Text specifications for inputs and initial states, and the CSV writers.
//!
//! Energy CSV columns: `step,time,H,boundary_power,residual`, one row per
//! step plus the initial state. `boundary_power` is the power supplied
//! through all ports (boundary and distributed) at the step midpoint.
//!
//! Trajectory CSV columns: `step,time,field,i,j,x,y,value`, one row per
//! state entry per snapshot. `field` is a momentum (`p1`, …) or strain
//! (`eps1`, …) label; `i, j` is the grid index (node index for momenta,
//! lower-corner node for cell-centred strains); `j` and `y` are empty on
//! one-dimensional grids.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundaryInput, DiscreteSystem, DistributedInput, EnergyLog, FaceId, Inputs, Profile, SimError, Snapshot, State};

fn floats(text: &str) -> Result<Vec<f64>, SimError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| SimError::Input(format!("invalid number `{t}`")))
        })
        .collect()
}

/// Parses one input specification into `inputs`:
/// `FACE=v1,…,vn[@sin:OMEGA]` for a boundary effort or
/// `distributed=u1,…[@sin:OMEGA]` for a `B_d` force.
pub fn parse_input(spec: &str, inputs: &mut Inputs) -> Result<(), SimError> {
    let (target, rest) = spec
        .split_once('=')
        .ok_or_else(|| SimError::Input(format!("expected TARGET=VALUES, got `{spec}`")))?;
    let (values, profile) = match rest.split_once('@') {
        None => (rest, Profile::Constant),
        Some((v, p)) => {
            let omega = p
                .strip_prefix("sin:")
                .and_then(|w| w.trim().parse::<f64>().ok())
                .ok_or_else(|| SimError::Input(format!("unknown profile `{p}` (expected sin:OMEGA)")))?;
            (v, Profile::Sin { omega })
        }
    };
    let value = floats(values)?;
    match target.trim() {
        "distributed" => {
            if inputs.distributed.is_some() {
                return Err(SimError::Input("distributed input given twice".into()));
            }
            inputs.distributed = Some(DistributedInput { value, profile });
        }
        face => {
            let face = FaceId::parse(face).ok_or_else(|| {
                SimError::Input(format!("unknown input target `{face}` (left, right, bottom, top, distributed)"))
            })?;
            inputs.boundary.push(BoundaryInput { face, value, profile });
        }
    }
    Ok(())
}

/// Initial state from `zero`, `random:SEED` (entries uniform in `[-1, 1]`)
/// or `mode:K` (every momentum component set to the `K`-th sine mode of
/// the domain, strains zero).
pub fn initial_state(sys: &DiscreteSystem, spec: &str) -> Result<State, SimError> {
    let mut x = State::zeros(sys);
    match spec.split_once(':') {
        None if spec == "zero" => {}
        Some(("random", seed)) => {
            let seed: u64 = seed
                .trim()
                .parse()
                .map_err(|_| SimError::Init(format!("invalid seed `{seed}`")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for v in x.p.iter_mut().chain(x.eps.iter_mut()) {
                *v = rng.gen_range(-1.0..=1.0);
            }
        }
        Some(("mode", k)) => {
            let k: u32 = k
                .trim()
                .parse()
                .ok()
                .filter(|&k| k > 0)
                .ok_or_else(|| SimError::Init(format!("invalid mode number `{k}`")))?;
            let g = &sys.grid;
            for (slot, pt) in sys.p_points.iter().enumerate() {
                let amp: f64 = (0..g.ell())
                    .map(|a| {
                        let len = g.spacing[a] * g.cells[a] as f64;
                        (k as f64 * std::f64::consts::PI * (pt.x[a] - g.lo[a]) / len).sin()
                    })
                    .product();
                for c in 0..sys.n {
                    x.p[slot * sys.n + c] = amp;
                }
            }
        }
        _ => {
            return Err(SimError::Init(format!(
                "unknown initial state `{spec}` (zero, random:SEED, mode:K)"
            )))
        }
    }
    Ok(x)
}

fn fmt(v: f64) -> String {
    format!("{v:.15e}")
}

pub fn write_energy_csv<W: Write>(out: W, log: &EnergyLog) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "time", "H", "boundary_power", "residual"])?;
    for r in &log.rows {
        w.write_record([
            r.step.to_string(),
            fmt(r.time),
            fmt(r.h),
            fmt(r.boundary_power),
            fmt(r.residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(out: W, sys: &DiscreteSystem, snapshots: &[Snapshot]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "time", "field", "i", "j", "x", "y", "value"])?;
    let two_d = sys.grid.ell() == 2;
    for s in snapshots {
        let blocks = [
            (&sys.p_points, &sys.momentum_labels, &s.state.p),
            (&sys.eps_points, &sys.strain_labels, &s.state.eps),
        ];
        for (points, labels, values) in blocks {
            let k = labels.len();
            for (slot, pt) in points.iter().enumerate() {
                for (c, label) in labels.iter().enumerate() {
                    let (j, y) = if two_d {
                        (pt.index[1].to_string(), fmt(pt.x[1]))
                    } else {
                        (String::new(), String::new())
                    };
                    w.write_record([
                        s.step.to_string(),
                        fmt(s.time),
                        label.clone(),
                        pt.index[0].to_string(),
                        j,
                        fmt(pt.x[0]),
                        y,
                        fmt(values[slot * k + c]),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}
