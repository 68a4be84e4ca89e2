//! Conic feasibility: exact simplex for LPs and a splitting method for
//! rotated second-order cone programs.

mod lp;
mod socp;

use std::ops::Range;

pub use lp::solve_lp;
pub use socp::{solve_socp, SocpSettings};

use crate::poly::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Free,
    Nonneg,
    /// A triple `(a, b, t)` with `a, b >= 0` and `a*b >= t^2`.
    Rsoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub range: Range<usize>,
    pub kind: BlockKind,
}

/// Linear equalities `A w = b` over variables partitioned into cone blocks.
#[derive(Debug, Clone)]
pub struct ConicProblem<C> {
    pub ncols: usize,
    /// Sparse rows of `A` as `(column, value)` pairs.
    pub rows: Vec<Vec<(usize, C)>>,
    pub rhs: Vec<C>,
    pub blocks: Vec<Block>,
    /// Minimized when present.
    pub objective: Option<Vec<C>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status<C> {
    Feasible(Vec<C>),
    /// Proven infeasible. For the simplex method `bound` is the (positive)
    /// optimal phase-1 value.
    Infeasible { bound: C },
    /// The numeric method judged the system infeasible within tolerance.
    NotFound,
    NonConverged,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome<C> {
    pub status: Status<C>,
    pub iterations: usize,
    /// `max |A w - b|` at the returned point (0 when no point is returned).
    pub primal_residual: f64,
    /// Largest cone violation at the returned point.
    pub cone_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProblemError {
    #[error("column {0} is not covered by exactly one block")]
    BadPartition(usize),
    #[error("row {0} references column {1} beyond {2} columns")]
    ColumnOutOfRange(usize, usize, usize),
    #[error("rhs has {0} entries for {1} rows")]
    RhsLength(usize, usize),
    #[error("rotated cone block at {0} does not have three columns")]
    BadRsoc(usize),
    #[error("the simplex method accepts only free and nonnegative blocks")]
    ConeNotLinear,
}

impl<C: Scalar> ConicProblem<C> {
    pub fn new(ncols: usize) -> Self {
        ConicProblem {
            ncols,
            rows: Vec::new(),
            rhs: Vec::new(),
            blocks: Vec::new(),
            objective: None,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.rhs.len() != self.rows.len() {
            return Err(ProblemError::RhsLength(self.rhs.len(), self.rows.len()));
        }
        let mut owner = vec![0u8; self.ncols];
        for b in &self.blocks {
            if b.kind == BlockKind::Rsoc && b.range.len() != 3 {
                return Err(ProblemError::BadRsoc(b.range.start));
            }
            for j in b.range.clone() {
                if j >= self.ncols {
                    return Err(ProblemError::BadPartition(j));
                }
                owner[j] += 1;
            }
        }
        if let Some(j) = owner.iter().position(|&c| c != 1) {
            return Err(ProblemError::BadPartition(j));
        }
        for (i, row) in self.rows.iter().enumerate() {
            for (j, _) in row {
                if *j >= self.ncols {
                    return Err(ProblemError::ColumnOutOfRange(i, *j, self.ncols));
                }
            }
        }
        Ok(())
    }

    pub fn to_float(&self) -> ConicProblem<f64> {
        ConicProblem {
            ncols: self.ncols,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|(j, v)| (*j, v.to_f64())).collect())
                .collect(),
            rhs: self.rhs.iter().map(Scalar::to_f64).collect(),
            blocks: self.blocks.clone(),
            objective: self
                .objective
                .as_ref()
                .map(|c| c.iter().map(Scalar::to_f64).collect()),
        }
    }

    /// `max_i |(A w - b)_i|`, evaluated in floating point.
    pub fn residual_f64(&self, w: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (row, b) in self.rows.iter().zip(&self.rhs) {
            let mut s = -b.to_f64();
            for (j, v) in row {
                s += v.to_f64() * w[*j];
            }
            worst = worst.max(s.abs());
        }
        worst
    }

    /// Largest violation of the block constraints at `w`.
    pub fn cone_violation_f64(&self, w: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for b in &self.blocks {
            match b.kind {
                BlockKind::Free => {}
                BlockKind::Nonneg => {
                    for j in b.range.clone() {
                        worst = worst.max(-w[j]);
                    }
                }
                BlockKind::Rsoc => {
                    let (a, bb, t) = (w[b.range.start], w[b.range.start + 1], w[b.range.start + 2]);
                    worst = worst.max(-a).max(-bb);
                    // Distance-like measure of t^2 - a*b.
                    let gap = t * t - a.max(0.0) * bb.max(0.0);
                    if gap > 0.0 {
                        worst = worst.max(gap / (a.abs() + bb.abs() + t.abs()).max(1.0));
                    }
                }
            }
        }
        worst
    }
}
