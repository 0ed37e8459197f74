//! Port-Hamiltonian model compiler for linear elastic structures.
//!
//! The pipeline runs from a declarative kinematic description
//! ([`model`]) through exact assembly of mass, stiffness and boundary
//! matrices ([`phs`]) to structural verification ([`verify`]) and
//! energy-conserving simulation ([`simulate`]).

pub mod diff_op;
pub mod matrix;
pub mod model;
pub mod phs;
pub mod verify;
pub mod poly;
pub mod rational;
pub mod simulate;

pub use diff_op::{BoundaryForm, DiffOpMatrix, DomainSpec, JetVector};
pub use matrix::{ExactMatrix, RatMatrix};
pub use model::{KinematicModel, ModelError, Section};
pub use phs::{assemble_phs, BoundaryPorts, PHSystem, PhsError};
pub use poly::{Coord, CoordSet, Poly, PolyMatrix};
pub use rational::{PiRational, Rational};
