//! Structure-preserving finite-difference discretization of compiled
//! systems and implicit-midpoint time integration with energy diagnostics.
//!
//! Momenta live on grid nodes and strains either at cell centres (first
//! order operators) or at interior nodes (second order operators in one
//! dimension). The discrete adjoint is the transpose of the discrete
//! operator, so the interconnection matrix is skew-symmetric by
//! construction.

mod grid;
mod integrate;
pub mod io;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra_sparse::{CooMatrix, CsrMatrix};
use thiserror::Error;

use crate::diff_op::Side;
use crate::phs::PHSystem;

pub use grid::{Grid, GridPoint, GridSpec};
pub use integrate::{
    discrete_hamiltonian, simulate, BoundaryInput, DistributedInput, EnergyLog, EnergyRow, Inputs,
    Integrator, Profile, SimConfig, SimOutput, Snapshot, State,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{0}")]
    Unsupported(String),
    #[error("grid: {0}")]
    Grid(String),
    #[error("boundary conditions: {0}")]
    Bc(String),
    #[error("input: {0}")]
    Input(String),
    #[error("initial state: {0}")]
    Init(String),
    #[error("time step must be positive and finite, got {0}")]
    TimeStep(f64),
    #[error("state has {got} entries, system expects {expected}")]
    Layout { expected: usize, got: usize },
    #[error("linear solver: {0}")]
    Solver(String),
}

/// One face of the rectangular grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceId {
    pub axis: usize,
    pub side: Side,
}

impl FaceId {
    pub const LEFT: FaceId = FaceId { axis: 0, side: Side::Lo };
    pub const RIGHT: FaceId = FaceId { axis: 0, side: Side::Hi };
    pub const BOTTOM: FaceId = FaceId { axis: 1, side: Side::Lo };
    pub const TOP: FaceId = FaceId { axis: 1, side: Side::Hi };

    pub fn parse(name: &str) -> Option<FaceId> {
        Some(match name {
            "left" => Self::LEFT,
            "right" => Self::RIGHT,
            "bottom" => Self::BOTTOM,
            "top" => Self::TOP,
            _ => return None,
        })
    }

    pub fn all(ell: usize) -> Vec<FaceId> {
        [Self::LEFT, Self::RIGHT, Self::BOTTOM, Self::TOP][..2 * ell].to_vec()
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.axis, self.side) {
            (0, Side::Lo) => "left",
            (0, Side::Hi) => "right",
            (1, Side::Lo) => "bottom",
            _ => "top",
        })
    }
}

/// Closure condition on one face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// `e_p = 0` on the face: boundary momentum nodes are eliminated.
    Clamped,
    /// No prescribed boundary effort; a boundary input may act here.
    Free,
}

/// Conditions per face; faces not listed are free.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundaryConditions {
    faces: BTreeMap<FaceId, BoundaryCondition>,
}

impl BoundaryConditions {
    pub fn free() -> Self {
        Self::default()
    }

    pub fn clamped(ell: usize) -> Self {
        let mut b = Self::default();
        for f in FaceId::all(ell) {
            b.set(f, BoundaryCondition::Clamped);
        }
        b
    }

    pub fn set(&mut self, face: FaceId, bc: BoundaryCondition) -> &mut Self {
        self.faces.insert(face, bc);
        self
    }

    pub fn get(&self, face: FaceId) -> BoundaryCondition {
        self.faces.get(&face).copied().unwrap_or(BoundaryCondition::Free)
    }

    /// Parses `left=clamped,right=free`.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut out = Self::default();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (face, kind) = item
                .split_once('=')
                .ok_or_else(|| SimError::Bc(format!("expected FACE=KIND, got `{item}`")))?;
            let face = FaceId::parse(face.trim())
                .ok_or_else(|| SimError::Bc(format!("unknown face `{face}` (left, right, bottom, top)")))?;
            let bc = match kind.trim() {
                "clamped" => BoundaryCondition::Clamped,
                "free" => BoundaryCondition::Free,
                other => return Err(SimError::Bc(format!("unknown condition `{other}` (clamped, free)"))),
            };
            out.set(face, bc);
        }
        Ok(out)
    }

    fn check(&self, ell: usize) -> Result<(), SimError> {
        match self.faces.keys().find(|f| f.axis >= ell) {
            Some(f) => Err(SimError::Bc(format!("face `{f}` does not exist on a {ell}-dimensional grid"))),
            None => Ok(()),
        }
    }
}

/// Where strain variables sit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// Strains at cell centres (first-order operators).
    Staggered,
    /// Strains at interior nodes (second-order operators, one dimension).
    Collocated,
}

/// Active boundary nodes of a free face, with face quadrature weights.
#[derive(Clone, Debug, PartialEq)]
pub struct FacePort {
    pub face: FaceId,
    /// `(active momentum index, weight)`.
    pub nodes: Vec<(usize, f64)>,
}

/// Finite-dimensional port-Hamiltonian system
/// `diag(W_p, W_ε) ẋ = J_d e + B u` with co-energies `e_p = M⁻¹p`, `e_ε = Kε`.
#[derive(Clone, Debug)]
pub struct DiscreteSystem {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub order: usize,
    pub layout: Layout,
    pub grid: Grid,
    pub bcs: BoundaryConditions,
    /// Active momentum nodes.
    pub p_points: Vec<GridPoint>,
    /// Strain points.
    pub eps_points: Vec<GridPoint>,
    /// Discrete `F`: `(m · |ε points|) × (n · |p points|)`.
    pub d: CsrMatrix<f64>,
    pub mass: Vec<Vec<f64>>,
    pub mass_inverse: Vec<Vec<f64>>,
    pub stiffness: Vec<Vec<f64>>,
    /// `B_d` as an `n × q` float matrix.
    pub bd: Option<Vec<Vec<f64>>>,
    pub ports: Vec<FacePort>,
    pub momentum_labels: Vec<String>,
    pub strain_labels: Vec<String>,
}

/// Grid layout used for `s`, or why it cannot be simulated.
pub fn supported_layout(s: &PHSystem) -> Result<Layout, SimError> {
    let name = &s.model.name;
    match (s.f.ell(), s.f.order()) {
        (1, 1) | (2, 1) => Ok(Layout::Staggered),
        (1, 2) => Ok(Layout::Collocated),
        (2, 2) => Err(SimError::Unsupported(format!(
            "{name}: second-order operators on two-dimensional domains (l=2, N=2) are outside the \
             simulator scope; build, verify and export support them symbolically"
        ))),
        (3, _) => Err(SimError::Unsupported(format!(
            "{name}: three-dimensional grids are not simulated; build, verify and export \
             support the model symbolically"
        ))),
        (l, n) => Err(SimError::Unsupported(format!("{name}: no discretization for l={l}, N={n}"))),
    }
}

/// Builds the discrete system on a rectangular grid.
pub fn discretize(s: &PHSystem, g: &GridSpec, bcs: &BoundaryConditions) -> Result<DiscreteSystem, SimError> {
    let ell = s.f.ell();
    let order = s.f.order();
    let name = s.model.name.clone();
    let layout = supported_layout(s)?;
    bcs.check(ell)?;
    let grid = Grid::new(g, s.domain())?;
    let (n, m) = (s.f.n(), s.f.m());

    let clamped = |node: &[usize]| {
        (0..ell).any(|k| {
            (node[k] == 0 && bcs.get(FaceId { axis: k, side: Side::Lo }) == BoundaryCondition::Clamped)
                || (node[k] == grid.cells[k]
                    && bcs.get(FaceId { axis: k, side: Side::Hi }) == BoundaryCondition::Clamped)
        })
    };
    let nodes = grid.nodes();
    let mut node_slot: Vec<Option<usize>> = vec![None; nodes.len()];
    let mut p_points = Vec::new();
    for (id, pt) in nodes.into_iter().enumerate() {
        if !clamped(&pt.index) {
            node_slot[id] = Some(p_points.len());
            p_points.push(pt);
        }
    }
    let eps_points = match layout {
        Layout::Staggered => grid.cells(),
        Layout::Collocated => grid.interior_nodes(),
    };
    if p_points.is_empty() {
        return Err(SimError::Grid("every momentum node is clamped".into()));
    }

    let f = |(k, i): (usize, usize)| s.f.coefficient(k, i).map(|c| c.to_f64_rows());
    let p0 = s.f.p0().to_f64_rows();
    let mut coo = CooMatrix::new(m * eps_points.len(), n * p_points.len());
    for (j, e) in eps_points.iter().enumerate() {
        let mut stencil: Vec<(Vec<usize>, Vec<Vec<f64>>, f64)> = Vec::new();
        match layout {
            Layout::Staggered => {
                for corner in 0..(1usize << ell) {
                    let bits: Vec<usize> = (0..ell).map(|k| (corner >> k) & 1).collect();
                    let node: Vec<usize> = (0..ell).map(|k| e.index[k] + bits[k]).collect();
                    let share = 1.0 / (1usize << ell) as f64;
                    stencil.push((node.clone(), p0.clone(), share));
                    for k in 0..ell {
                        if let Some(c) = f((k + 1, 1)) {
                            let sign = if bits[k] == 1 { 1.0 } else { -1.0 };
                            stencil.push((node.clone(), c, sign * 2.0 * share / grid.spacing[k]));
                        }
                    }
                }
            }
            Layout::Collocated => {
                let i = e.index[0];
                let h = grid.spacing[0];
                stencil.push((vec![i], p0.clone(), 1.0));
                if let Some(c) = f((1, 1)) {
                    stencil.push((vec![i + 1], c.clone(), 0.5 / h));
                    stencil.push((vec![i - 1], c, -0.5 / h));
                }
                if let Some(c) = f((1, 2)) {
                    stencil.push((vec![i - 1], c.clone(), 1.0 / (h * h)));
                    stencil.push((vec![i], c.clone(), -2.0 / (h * h)));
                    stencil.push((vec![i + 1], c, 1.0 / (h * h)));
                }
            }
        }
        for (node, c, w) in stencil {
            let Some(slot) = node_slot[grid.node_id(&node)] else {
                continue;
            };
            for (r, row) in c.iter().enumerate() {
                for (col, v) in row.iter().enumerate() {
                    if *v != 0.0 {
                        coo.push(j * m + r, slot * n + col, w * v);
                    }
                }
            }
        }
    }
    let d = CsrMatrix::from(&coo);

    let mut ports = Vec::new();
    if order == 1 {
        for face in FaceId::all(ell) {
            if bcs.get(face) != BoundaryCondition::Free {
                continue;
            }
            let at = match face.side {
                Side::Lo => 0,
                Side::Hi => grid.cells[face.axis],
            };
            let nodes = p_points
                .iter()
                .enumerate()
                .filter(|(_, p)| p.index[face.axis] == at)
                .map(|(slot, p)| {
                    let w: f64 = (0..ell)
                        .filter(|&k| k != face.axis)
                        .map(|k| grid.trapezoid(k, p.index[k]))
                        .product();
                    (slot, w)
                })
                .collect();
            ports.push(FacePort { face, nodes });
        }
    }

    Ok(DiscreteSystem {
        name,
        n,
        m,
        order,
        layout,
        grid,
        bcs: bcs.clone(),
        p_points,
        eps_points,
        d,
        mass: s.mass.to_f64_rows(),
        mass_inverse: s.mass_inverse.to_f64_rows(),
        stiffness: s.stiffness.to_f64_rows(),
        bd: s.bd.as_ref().map(|b| b.to_f64_rows()),
        ports,
        momentum_labels: s.labels.momenta.iter().map(|(p, _)| p.clone()).collect(),
        strain_labels: s.labels.strains.clone(),
    })
}

impl DiscreteSystem {
    pub fn p_len(&self) -> usize {
        self.n * self.p_points.len()
    }

    pub fn eps_len(&self) -> usize {
        self.m * self.eps_points.len()
    }

    /// Total number of state variables.
    pub fn dim(&self) -> usize {
        self.p_len() + self.eps_len()
    }

    /// Quadrature weight per momentum entry.
    pub fn p_weights(&self) -> Vec<f64> {
        self.p_points
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.weight, self.n))
            .collect()
    }

    /// Quadrature weight per strain entry.
    pub fn eps_weights(&self) -> Vec<f64> {
        self.eps_points
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.weight, self.m))
            .collect()
    }

    /// `J_d = [[0, -D̃ᵀ], [D̃, 0]]` with `D̃ = W_ε D`.
    pub fn interconnection(&self) -> CsrMatrix<f64> {
        let np = self.p_len();
        let dim = self.dim();
        let w = self.eps_weights();
        let mut coo = CooMatrix::new(dim, dim);
        for (r, c, v) in self.d.triplet_iter() {
            let x = w[r] * v;
            coo.push(np + r, c, x);
            coo.push(c, np + r, -x);
        }
        CsrMatrix::from(&coo)
    }

    /// Whether `J_d + J_dᵀ` vanishes entry for entry.
    pub fn is_skew(&self) -> bool {
        let j = self.interconnection();
        let jt = j.transpose();
        let sum = &j + &jt;
        sum.values().iter().all(|v| *v == 0.0)
    }

    /// `D x` for a momentum-layout vector.
    pub fn apply_d(&self, x: &[f64]) -> Vec<f64> {
        integrate::csr_mul(&self.d, x)
    }

    pub fn port(&self, face: FaceId) -> Option<&FacePort> {
        self.ports.iter().find(|p| p.face == face)
    }
}
