//! MIP data model: the solver-independent ground truth that every other
//! stage (solving, feature extraction, labeling) consumes.
//!
//! Instances are always stored in minimization form; maximization inputs
//! are normalized at parse time by negating the objective.

mod generate;
mod mps;
mod permute;

pub use generate::{generate_instance, Family, GenParams};
pub use mps::{parse_mps, write_mps};
pub use permute::permute_instance;

use thiserror::Error;

/// Sense of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum RowSense {
    /// `a'x <= b`
    Le,
    /// `a'x >= b`
    Ge,
    /// `a'x == b`
    Eq,
}

/// Integrality class of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

/// Errors raised while building or reading instances.
#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed MPS file (line {line}): {reason}")]
    MalformedFile { line: usize, reason: String },
    #[error("empty problem: {0}")]
    EmptyProblem(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

/// A mixed-integer program in minimization form:
///
/// ```text
/// min c'x + offset   s.t.   A x {<=,>=,==} b,   l <= x <= u,   x_j integral for j in I
/// ```
///
/// The matrix is stored row-major and sparse; every stored entry is
/// nonzero and (row, col) pairs are unique. Instances are immutable
/// after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct MipInstance {
    pub name: String,
    /// Sparse rows, each sorted by column index.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub row_sense: Vec<RowSense>,
    pub rhs: Vec<f64>,
    /// Dense objective vector, length `n_cols()`.
    pub objective: Vec<f64>,
    /// Constant added to the objective value (from presolve fixings or
    /// an RHS entry on the objective row).
    pub objective_offset: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integrality: Vec<VarKind>,
}

impl MipInstance {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.objective.len()
    }

    /// Number of nonzero matrix entries.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Checks the structural invariants: nonzero stored entries, no
    /// duplicate coordinates, consistent dimensions, ordered bounds.
    pub fn validate(&self) -> Result<(), String> {
        let (m, n) = (self.n_rows(), self.n_cols());
        if self.row_sense.len() != m || self.rhs.len() != m {
            return Err("row metadata length mismatch".into());
        }
        if self.lower.len() != n || self.upper.len() != n || self.integrality.len() != n {
            return Err("column metadata length mismatch".into());
        }
        for (i, row) in self.rows.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &(j, v) in row {
                if j >= n {
                    return Err(format!("row {i} references column {j} out of range"));
                }
                if v == 0.0 {
                    return Err(format!("row {i} stores a zero entry at column {j}"));
                }
                if prev.is_some_and(|p| p >= j) {
                    return Err(format!("row {i} has unsorted or duplicate column {j}"));
                }
                prev = Some(j);
            }
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return Err(format!("column {j} has crossed bounds"));
            }
            if self.integrality[j] == VarKind::Binary
                && (self.lower[j] < 0.0 || self.upper[j] > 1.0)
            {
                return Err(format!("binary column {j} has bounds outside [0,1]"));
            }
        }
        Ok(())
    }

    /// Column-major view of the matrix, built on demand.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.n_cols()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                cols[j].push((i, v));
            }
        }
        cols
    }

    /// Evaluates `c'x + offset`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .map(|(c, v)| c * v)
            .sum::<f64>()
            + self.objective_offset
    }

    /// Checks that `x` satisfies all rows and bounds within `tol`, and
    /// integrality of integer columns within `int_tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64, int_tol: f64) -> bool {
        if x.len() != self.n_cols() {
            return false;
        }
        for j in 0..self.n_cols() {
            if x[j] < self.lower[j] - tol || x[j] > self.upper[j] + tol {
                return false;
            }
            if self.integrality[j].is_integral() && (x[j] - x[j].round()).abs() > int_tol {
                return false;
            }
        }
        for i in 0..self.n_rows() {
            let act: f64 = self.rows[i].iter().map(|&(j, v)| v * x[j]).sum();
            let ok = match self.row_sense[i] {
                RowSense::Le => act <= self.rhs[i] + tol,
                RowSense::Ge => act >= self.rhs[i] - tol,
                RowSense::Eq => (act - self.rhs[i]).abs() <= tol,
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Absolute values of the nonzero entries of `A`, `b` and `c`, kept as
/// multisets. These drive the post-scaling magnitude features.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSets {
    pub a_prime: Vec<f64>,
    pub b_prime: Vec<f64>,
    pub c_prime: Vec<f64>,
}

impl MagnitudeSets {
    pub fn min_max(values: &[f64]) -> Option<(f64, f64)> {
        if values.is_empty() {
            return None;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Some((lo, hi))
    }
}

/// Collects `A'`, `b'`, `c'` for an instance. Empty sets are allowed,
/// e.g. for a zero objective.
pub fn magnitude_sets(inst: &MipInstance) -> MagnitudeSets {
    let mut a_prime = Vec::with_capacity(inst.nnz());
    for row in &inst.rows {
        for &(_, v) in row {
            a_prime.push(v.abs());
        }
    }
    let b_prime = inst
        .rhs
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| v.abs())
        .collect();
    let c_prime = inst
        .objective
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| v.abs())
        .collect();
    MagnitudeSets {
        a_prime,
        b_prime,
        c_prime,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_row_instance() -> MipInstance {
        MipInstance {
            name: "t".into(),
            rows: vec![vec![(0, 2.0), (1, -3.0)], vec![(1, 0.5)]],
            row_sense: vec![RowSense::Le, RowSense::Ge],
            rhs: vec![-7.0, 0.0],
            objective: vec![0.0, 0.0],
            objective_offset: 0.0,
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
            integrality: vec![VarKind::Binary, VarKind::Binary],
        }
    }

    #[test]
    fn magnitude_sets_collects_absolute_nonzeros() {
        let inst = two_row_instance();
        let mags = magnitude_sets(&inst);
        assert_eq!(mags.a_prime, vec![2.0, 3.0, 0.5]);
        assert_eq!(mags.b_prime, vec![7.0]);
        assert!(mags.c_prime.is_empty());
    }

    #[test]
    fn magnitude_sets_rhs_is_multiset() {
        let mut inst = two_row_instance();
        inst.rows.push(vec![(0, 1.0)]);
        inst.row_sense.push(RowSense::Le);
        inst.rhs = vec![-7.0, 0.0, 7.0];
        let mags = magnitude_sets(&inst);
        assert_eq!(mags.b_prime, vec![7.0, 7.0]);
    }

    #[test]
    fn validate_rejects_zero_entry() {
        let mut inst = two_row_instance();
        inst.rows[0][0].1 = 0.0;
        assert!(inst.validate().is_err());
    }

    #[test]
    fn validate_rejects_duplicate_coordinate() {
        let mut inst = two_row_instance();
        inst.rows[0].push((1, 4.0));
        assert!(inst.validate().is_err());
    }
}
