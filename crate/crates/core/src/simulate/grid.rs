use crate::diff_op::DomainSpec;
use crate::rational::to_f64;

use super::SimError;

/// Cells per axis; spacing follows from the model domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub cells: Vec<usize>,
}

impl GridSpec {
    pub fn new(cells: Vec<usize>) -> Self {
        GridSpec { cells }
    }

    /// Parses `N` or `N,M`.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let cells = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| SimError::Grid(format!("invalid cell count `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GridSpec { cells })
    }
}

/// Uniform rectangular grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub cells: Vec<usize>,
    pub lo: Vec<f64>,
    pub spacing: Vec<f64>,
}

/// A node or cell centre with its quadrature weight.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    /// Node index, or lower-corner node index for a cell centre.
    pub index: Vec<usize>,
    pub x: Vec<f64>,
    pub weight: f64,
}

impl Grid {
    pub fn new(spec: &GridSpec, dom: &DomainSpec) -> Result<Self, SimError> {
        let ell = dom.ell();
        if spec.cells.len() != ell {
            return Err(SimError::Grid(format!(
                "{} cell counts given for a {ell}-dimensional domain",
                spec.cells.len()
            )));
        }
        if let Some(c) = spec.cells.iter().find(|&&c| c < 3) {
            return Err(SimError::Grid(format!("at least 3 cells per axis are required, got {c}")));
        }
        let lo: Vec<f64> = dom.lo().iter().map(to_f64).collect();
        let spacing: Vec<f64> = (0..ell)
            .map(|k| (to_f64(&dom.hi()[k]) - lo[k]) / spec.cells[k] as f64)
            .collect();
        if spacing.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(SimError::Grid("grid spacing must be positive".into()));
        }
        Ok(Grid {
            cells: spec.cells.clone(),
            lo,
            spacing,
        })
    }

    pub fn ell(&self) -> usize {
        self.cells.len()
    }

    /// Flat node id with the first axis fastest.
    pub fn node_id(&self, index: &[usize]) -> usize {
        let mut id = 0;
        let mut stride = 1;
        for (k, &i) in index.iter().enumerate() {
            id += i * stride;
            stride *= self.cells[k] + 1;
        }
        id
    }

    /// Trapezoid weight of node `i` along axis `k`.
    pub fn trapezoid(&self, k: usize, i: usize) -> f64 {
        if i == 0 || i == self.cells[k] {
            0.5 * self.spacing[k]
        } else {
            self.spacing[k]
        }
    }

    fn points(&self, counts: &[usize], offset: f64, weight: impl Fn(&[usize]) -> f64) -> Vec<GridPoint> {
        let total: usize = counts.iter().product();
        (0..total)
            .map(|mut flat| {
                let index: Vec<usize> = counts
                    .iter()
                    .map(|&c| {
                        let i = flat % c;
                        flat /= c;
                        i
                    })
                    .collect();
                let x = (0..self.ell())
                    .map(|k| self.lo[k] + (index[k] as f64 + offset) * self.spacing[k])
                    .collect();
                let weight = weight(&index);
                GridPoint { index, x, weight }
            })
            .collect()
    }

    /// All nodes with trapezoid weights.
    pub fn nodes(&self) -> Vec<GridPoint> {
        let counts: Vec<usize> = self.cells.iter().map(|c| c + 1).collect();
        self.points(&counts, 0.0, |i| {
            (0..self.ell()).map(|k| self.trapezoid(k, i[k])).product()
        })
    }

    /// Cell centres with cell volumes.
    pub fn cells(&self) -> Vec<GridPoint> {
        let vol: f64 = self.spacing.iter().product();
        self.points(&self.cells, 0.5, |_| vol)
    }

    /// Interior nodes of a one-dimensional grid, weight `Δx`.
    pub fn interior_nodes(&self) -> Vec<GridPoint> {
        let h = self.spacing[0];
        self.nodes()
            .into_iter()
            .filter(|p| p.index[0] > 0 && p.index[0] < self.cells[0])
            .map(|mut p| {
                p.weight = h;
                p
            })
            .collect()
    }
}
