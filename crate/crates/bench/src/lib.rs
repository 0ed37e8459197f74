//! Fixtures shared by the benchmarks.

use phs_core::model::{builtin_model, default_params};
use phs_core::simulate::io::initial_state;
use phs_core::simulate::{discretize, BoundaryConditions, DiscreteSystem, GridSpec, State};
use phs_core::{assemble_phs, KinematicModel, PHSystem};

pub fn model(name: &str) -> KinematicModel {
    builtin_model(name, &default_params(name).expect("builtin")).expect("valid builtin")
}

pub fn system(name: &str) -> PHSystem {
    assemble_phs(&model(name)).expect("builtins assemble")
}

/// Left-clamped discretization with a seeded random state.
pub fn discrete(name: &str, cells: &[usize]) -> (DiscreteSystem, State) {
    let bcs = BoundaryConditions::parse("left=clamped").expect("valid spec");
    let sys = discretize(&system(name), &GridSpec::new(cells.to_vec()), &bcs).expect("simulable");
    let x = initial_state(&sys, "random:1").expect("valid init");
    (sys, x)
}
