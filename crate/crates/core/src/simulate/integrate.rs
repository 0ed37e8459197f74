use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};

use super::{BoundaryCondition, DiscreteSystem, FaceId, SimError};

/// Time profile multiplying an input amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    Constant,
    /// `sin(ω t)`.
    Sin { omega: f64 },
}

impl Profile {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Profile::Constant => 1.0,
            Profile::Sin { omega } => (omega * t).sin(),
        }
    }
}

/// Boundary effort `u_∂ ∈ ℝⁿ` applied uniformly on a free face.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryInput {
    pub face: FaceId,
    pub value: Vec<f64>,
    pub profile: Profile,
}

/// Distributed force `B_d u_d` applied uniformly over the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributedInput {
    pub value: Vec<f64>,
    pub profile: Profile,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Inputs {
    pub boundary: Vec<BoundaryInput>,
    pub distributed: Option<DistributedInput>,
}

impl Inputs {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty() && self.distributed.is_none()
    }

    fn validate(&self, sys: &DiscreteSystem) -> Result<(), SimError> {
        for b in &self.boundary {
            if sys.order != 1 {
                return Err(SimError::Input(format!(
                    "{}: boundary inputs are available for first-order operators only; \
                     second-order models support clamped/free closure",
                    sys.name
                )));
            }
            if b.face.axis >= sys.grid.ell() {
                return Err(SimError::Input(format!("face `{}` does not exist", b.face)));
            }
            if sys.bcs.get(b.face) == BoundaryCondition::Clamped {
                return Err(SimError::Input(format!("face `{}` is clamped and cannot take an input", b.face)));
            }
            if b.value.len() != sys.n {
                return Err(SimError::Input(format!(
                    "boundary input on `{}` has {} components, expected n = {}",
                    b.face,
                    b.value.len(),
                    sys.n
                )));
            }
        }
        if let Some(d) = &self.distributed {
            let Some(bd) = &sys.bd else {
                return Err(SimError::Input(format!("{} declares no [Bd] matrix", sys.name)));
            };
            let q = bd.first().map_or(0, Vec::len);
            if d.value.len() != q {
                return Err(SimError::Input(format!(
                    "distributed input has {} components, B_d has {q} columns",
                    d.value.len()
                )));
            }
        }
        Ok(())
    }

    /// Port contribution to the momentum equations at time `t`, already
    /// weighted so that the supplied power is `e_pᵀ g`.
    fn load(&self, sys: &DiscreteSystem, t: f64) -> Vec<f64> {
        let n = sys.n;
        let mut g = vec![0.0; sys.p_len()];
        for b in &self.boundary {
            let s = b.profile.at(t);
            let port = sys.port(b.face).expect("validated face is free");
            for &(slot, w) in &port.nodes {
                for c in 0..n {
                    g[slot * n + c] += w * s * b.value[c];
                }
            }
        }
        if let (Some(d), Some(bd)) = (&self.distributed, &sys.bd) {
            let s = d.profile.at(t);
            let f: Vec<f64> = bd
                .iter()
                .map(|row| row.iter().zip(&d.value).map(|(a, u)| a * u).sum::<f64>() * s)
                .collect();
            for (slot, p) in sys.p_points.iter().enumerate() {
                for c in 0..n {
                    g[slot * n + c] += p.weight * f[c];
                }
            }
        }
        g
    }
}

/// Momenta then strains, both point-major.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub p: Vec<f64>,
    pub eps: Vec<f64>,
}

impl State {
    pub fn zeros(sys: &DiscreteSystem) -> Self {
        State {
            p: vec![0.0; sys.p_len()],
            eps: vec![0.0; sys.eps_len()],
        }
    }

    fn check(&self, sys: &DiscreteSystem) -> Result<(), SimError> {
        let got = self.p.len() + self.eps.len();
        if self.p.len() != sys.p_len() || self.eps.len() != sys.eps_len() {
            return Err(SimError::Layout {
                expected: sys.dim(),
                got,
            });
        }
        Ok(())
    }
}

/// `y = blockdiag(A, …, A) x` with `A` of size `k × k`.
fn blocks(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let k = a.len();
    let mut y = vec![0.0; x.len()];
    for (xb, yb) in x.chunks(k).zip(y.chunks_mut(k)) {
        for (i, row) in a.iter().enumerate() {
            yb[i] = row.iter().zip(xb).map(|(c, v)| c * v).sum();
        }
    }
    y
}

pub(crate) fn csr_mul(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    a.row_iter()
        .map(|row| row.col_indices().iter().zip(row.values()).map(|(&c, v)| v * x[c]).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `H = ½ Σ_i w_i p_iᵀ M⁻¹ p_i + ½ Σ_j w_j ε_jᵀ K ε_j`.
pub fn discrete_hamiltonian(sys: &DiscreteSystem, state: &State) -> Result<f64, SimError> {
    state.check(sys)?;
    Ok(hamiltonian(sys, &sys.p_weights(), &sys.eps_weights(), state))
}

fn hamiltonian(sys: &DiscreteSystem, wp: &[f64], we: &[f64], x: &State) -> f64 {
    let ep = blocks(&sys.mass_inverse, &x.p);
    let ee = blocks(&sys.stiffness, &x.eps);
    let kin: f64 = x.p.iter().zip(&ep).zip(wp).map(|((p, e), w)| w * p * e).sum();
    let pot: f64 = x.eps.iter().zip(&ee).zip(we).map(|((p, e), w)| w * p * e).sum();
    0.5 * (kin + pot)
}

/// Implicit midpoint stepper with a factorized Schur complement
/// `S = W_p ⊗ M + (dt/2)² Dᵀ (W_ε ⊗ K) D`.
pub struct Integrator<'a> {
    sys: &'a DiscreteSystem,
    dt: f64,
    wp: Vec<f64>,
    we: Vec<f64>,
    dt_mat: CsrMatrix<f64>,
    s: CsrMatrix<f64>,
    chol: CscCholesky<f64>,
}

impl<'a> Integrator<'a> {
    pub fn new(sys: &'a DiscreteSystem, dt: f64) -> Result<Self, SimError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SimError::TimeStep(dt));
        }
        let a = 0.5 * dt;
        let wp = sys.p_weights();
        let we = sys.eps_weights();
        let (n, m) = (sys.n, sys.m);

        let mut wk = CooMatrix::new(sys.eps_len(), sys.eps_len());
        for (j, pt) in sys.eps_points.iter().enumerate() {
            for r in 0..m {
                for c in 0..m {
                    let v = sys.stiffness[r][c];
                    if v != 0.0 {
                        wk.push(j * m + r, j * m + c, a * a * pt.weight * v);
                    }
                }
            }
        }
        let wk = CsrMatrix::from(&wk);
        let dt_mat = sys.d.transpose();
        let coupling = &(&dt_mat * &wk) * &sys.d;

        let mut mass = CooMatrix::new(sys.p_len(), sys.p_len());
        for (i, pt) in sys.p_points.iter().enumerate() {
            for r in 0..n {
                for c in 0..n {
                    let v = sys.mass[r][c];
                    if v != 0.0 {
                        mass.push(i * n + r, i * n + c, pt.weight * v);
                    }
                }
            }
        }
        let s = &CsrMatrix::from(&mass) + &coupling;
        // Exact symmetry for the factorization.
        let st = s.transpose();
        let s = &(&s + &st) * 0.5;
        let chol = CscCholesky::factor(&CscMatrix::from(&s)).map_err(|e| SimError::Solver(format!("{e:?}")))?;
        Ok(Integrator {
            sys,
            dt,
            wp,
            we,
            dt_mat,
            s,
            chol,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = self.chol.solve(&DMatrix::from_column_slice(b.len(), 1, b));
        let sy = csr_mul(&self.s, y.as_slice());
        let r: Vec<f64> = b.iter().zip(&sy).map(|(b, s)| b - s).collect();
        let dy = self.chol.solve(&DMatrix::from_column_slice(r.len(), 1, &r));
        y += dy;
        y.as_slice().to_vec()
    }

    /// One step from time `t`; returns the new state and the power
    /// supplied through the ports, evaluated at the midpoint.
    pub fn step(&self, x: &State, t: f64, inputs: &Inputs) -> (State, f64) {
        let sys = self.sys;
        let a = 0.5 * self.dt;
        let ee = blocks(&sys.stiffness, &x.eps);
        let wee: Vec<f64> = ee.iter().zip(&self.we).map(|(e, w)| e * w).collect();
        let dtw = csr_mul(&self.dt_mat, &wee);
        let g = if inputs.is_empty() {
            None
        } else {
            Some(inputs.load(sys, t + a))
        };
        let mut b: Vec<f64> = x
            .p
            .iter()
            .zip(&self.wp)
            .zip(&dtw)
            .map(|((p, w), d)| w * p - a * d)
            .collect();
        if let Some(g) = &g {
            for (bi, gi) in b.iter_mut().zip(g) {
                *bi += a * gi;
            }
        }
        let y = self.solve(&b);
        let my = blocks(&sys.mass, &y);
        let p: Vec<f64> = my.iter().zip(&x.p).map(|(m, p)| 2.0 * m - p).collect();
        let dy = csr_mul(&sys.d, &y);
        let eps: Vec<f64> = x.eps.iter().zip(&dy).map(|(e, d)| e + self.dt * d).collect();
        let power = g.as_ref().map_or(0.0, |g| dot(&y, g));
        (State { p, eps }, power)
    }

    pub fn hamiltonian(&self, x: &State) -> f64 {
        hamiltonian(self.sys, &self.wp, &self.we, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub steps: usize,
    /// Snapshot cadence in steps; `0` records only the initial and final
    /// states.
    pub record_every: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub state: State,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRow {
    pub step: usize,
    pub time: f64,
    pub h: f64,
    /// Port power at the midpoint of the step ending here.
    pub boundary_power: f64,
    /// `H_k - H_{k-1} - dt · power`.
    pub residual: f64,
}

/// One row per step plus the initial state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyLog {
    pub rows: Vec<EnergyRow>,
}

impl EnergyLog {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    }

    /// `|H(T) − H(0)| / H(0)`, or the absolute drift when `H(0) = 0`.
    pub fn relative_drift(&self) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) if a.h != 0.0 => (b.h - a.h).abs() / a.h.abs(),
            (Some(a), Some(b)) => (b.h - a.h).abs(),
            _ => 0.0,
        }
    }

    /// Largest `|residual| / max(1, |H|)` over the run.
    pub fn max_scaled_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.residual.abs() / r.h.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutput {
    pub snapshots: Vec<Snapshot>,
    pub energy: EnergyLog,
}

/// Runs `cfg.steps` midpoint steps from `init`.
pub fn simulate(sys: &DiscreteSystem, init: &State, cfg: &SimConfig, inputs: &Inputs) -> Result<SimOutput, SimError> {
    init.check(sys)?;
    inputs.validate(sys)?;
    let integ = Integrator::new(sys, cfg.dt)?;
    let mut x = init.clone();
    let mut h = integ.hamiltonian(&x);
    let mut energy = EnergyLog {
        rows: vec![EnergyRow {
            step: 0,
            time: 0.0,
            h,
            boundary_power: 0.0,
            residual: 0.0,
        }],
    };
    let mut snapshots = vec![Snapshot {
        step: 0,
        time: 0.0,
        state: x.clone(),
    }];
    for k in 1..=cfg.steps {
        let t = (k - 1) as f64 * cfg.dt;
        let (next, power) = integ.step(&x, t, inputs);
        let h_next = integ.hamiltonian(&next);
        let time = k as f64 * cfg.dt;
        energy.rows.push(EnergyRow {
            step: k,
            time,
            h: h_next,
            boundary_power: power,
            residual: h_next - h - cfg.dt * power,
        });
        x = next;
        h = h_next;
        let due = cfg.record_every > 0 && k % cfg.record_every == 0;
        if due || k == cfg.steps {
            snapshots.push(Snapshot {
                step: k,
                time,
                state: x.clone(),
            });
        }
    }
    Ok(SimOutput { snapshots, energy })
}
