//! Small dense matrices over the rationals.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{fmt_rational, int, to_f64, PiRational, Rational};

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

/// First leading principal minor that is not strictly positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorWitness {
    /// Size of the offending leading block (1-based).
    pub order: usize,
    pub value: Rational,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn diag(d: &[Rational]) -> Self {
        let mut m = RatMatrix::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    /// Builds from rows; panics if rows are ragged.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        RatMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, o.rows, "matrix product shape mismatch");
        let mut r = RatMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        r.data[i * o.cols + j] += a * b;
                    }
                }
            }
        }
        r
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, o: &RatMatrix) -> RatMatrix {
        assert_eq!(self.shape(), o.shape(), "matrix sum shape mismatch");
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &RatMatrix) -> RatMatrix {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Sub-matrix picking the listed rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> RatMatrix {
        RatMatrix::from_rows(
            rows.iter()
                .map(|&i| cols.iter().map(|&j| self.get(i, j).clone()).collect())
                .collect(),
        )
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &RatMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j).clone());
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> RatMatrix {
        let r: Vec<usize> = (r0..r0 + rows).collect();
        let c: Vec<usize> = (c0..c0 + cols).collect();
        self.select(&r, &c)
    }

    /// Determinant by fraction-exact Gaussian elimination.
    pub fn determinant(&self) -> Rational {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a.get(i, k).is_zero()) else {
                return Rational::zero();
            };
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let piv = a.get(k, k).clone();
            det *= &piv;
            for i in k + 1..n {
                let f = a.get(i, k) / &piv;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let v = a.get(i, j) - &f * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// All leading principal minors, smallest first.
    pub fn leading_minors(&self) -> Vec<Rational> {
        (1..=self.rows.min(self.cols))
            .map(|k| self.block(0, 0, k, k).determinant())
            .collect()
    }

    /// Sylvester's criterion on a symmetric matrix. Returns the first
    /// non-positive leading minor.
    pub fn positive_definite(&self) -> Result<(), MinorWitness> {
        for (k, m) in self.leading_minors().into_iter().enumerate() {
            if !m.is_positive() {
                return Err(MinorWitness {
                    order: k + 1,
                    value: m,
                });
            }
        }
        Ok(())
    }

    /// Exact inverse, `None` when singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMatrix::identity(n);
        for k in 0..n {
            let p = (k..n).find(|&i| !a.get(i, k).is_zero())?;
            a.swap_rows(p, k);
            inv.swap_rows(p, k);
            let piv = a.get(k, k).clone();
            for j in 0..n {
                let v = a.get(k, j) / &piv;
                a.set(k, j, v);
                let v = inv.get(k, j) / &piv;
                inv.set(k, j, v);
            }
            for i in 0..n {
                if i == k || a.get(i, k).is_zero() {
                    continue;
                }
                let f = a.get(i, k).clone();
                for j in 0..n {
                    let v = a.get(i, j) - &f * a.get(k, j);
                    a.set(i, j, v);
                    let v = inv.get(i, j) - &f * inv.get(k, j);
                    inv.set(i, j, v);
                }
            }
        }
        Some(inv)
    }

    /// A nonzero vector in the kernel, if one exists.
    pub fn null_vector(&self) -> Option<Vec<Rational>> {
        let (m, n) = self.shape();
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| !a.get(i, c).is_zero()) else {
                continue;
            };
            a.swap_rows(p, r);
            let piv = a.get(r, c).clone();
            for j in 0..n {
                let v = a.get(r, j) / &piv;
                a.set(r, j, v);
            }
            for i in 0..m {
                if i != r && !a.get(i, c).is_zero() {
                    let f = a.get(i, c).clone();
                    for j in 0..n {
                        let v = a.get(i, j) - &f * a.get(r, j);
                        a.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let free = (0..n).find(|c| !pivots.contains(c))?;
        let mut x = vec![Rational::zero(); n];
        x[free] = Rational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = -a.get(row, free).clone();
        }
        Some(x)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(to_f64).collect())
            .collect()
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(fmt_rational).collect())
            .collect();
        let w = cells.iter().flatten().map(|s| s.len()).max().unwrap_or(1);
        for row in cells {
            let line: Vec<String> = row.iter().map(|s| format!("{s:>w$}")).collect();
            writeln!(f, "[ {} ]", line.join("  "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMatrix {}x{}\n{}", self.rows, self.cols, self)
    }
}

/// A rational matrix times a common power of π.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactMatrix {
    pub pi_pow: i32,
    pub q: RatMatrix,
}

impl ExactMatrix {
    pub fn rational(q: RatMatrix) -> Self {
        ExactMatrix { pi_pow: 0, q }
    }

    pub fn get(&self, i: usize, j: usize) -> PiRational {
        PiRational::new(self.q.get(i, j).clone(), self.pi_pow)
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn inverse(&self) -> Option<ExactMatrix> {
        Some(ExactMatrix {
            pi_pow: -self.pi_pow,
            q: self.q.inverse()?,
        })
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        let s = std::f64::consts::PI.powi(self.pi_pow);
        self.q
            .to_f64_rows()
            .into_iter()
            .map(|r| r.into_iter().map(|v| v * s).collect())
            .collect()
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_pow {
            0 => write!(f, "{}", self.q),
            k => write!(f, "pi^{} ×\n{}", k, self.q),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn indefinite_matrix_witness() {
        let c = RatMatrix::from_i64(&[&[1, 2], &[2, 1]]);
        let w = c.positive_definite().unwrap_err();
        assert_eq!(w.order, 2);
        assert_eq!(w.value, int(-3));
    }

    #[test]
    fn inverse_round_trip() {
        let a = RatMatrix::from_rows(vec![
            vec![rat(2, 1), rat(1, 3), rat(0, 1)],
            vec![rat(1, 3), rat(5, 7), rat(1, 1)],
            vec![rat(0, 1), rat(1, 1), rat(9, 2)],
        ]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), RatMatrix::identity(3));
    }

    #[test]
    fn kernel_vector() {
        let a = RatMatrix::from_i64(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        let x = a.null_vector().unwrap();
        assert!(a.mul_vec(&x).iter().all(Zero::is_zero));
        assert!(x.iter().any(|v| !v.is_zero()));
        assert!(RatMatrix::identity(3).null_vector().is_none());
    }

    #[test]
    fn determinant_with_pivoting() {
        let a = RatMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(a.determinant(), int(-1));
    }
}
