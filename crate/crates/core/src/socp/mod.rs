//! The structured conic program shared by every precoder design:
//!
//! ```text
//! minimize    ‖u‖²
//! subject to  αᵢ‖u‖ ≤ gᵢᵀu − hᵢ,   i = 1..m
//! ```
//!
//! `αᵢ = 0` rows are plain halfspaces. The reference backend is
//! [`BarrierSolver`]; anything implementing [`SocpSolver`] can replace it.

mod barrier;
mod nnls;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Result};

pub use barrier::BarrierSolver;
pub use nnls::nnls;

/// Default feasibility/optimality tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocpRow {
    pub alpha: f64,
    pub g: Vec<f64>,
    pub h: f64,
}

impl SocpRow {
    pub fn new(alpha: f64, g: Vec<f64>, h: f64) -> Self {
        Self { alpha, g, h }
    }

    /// `αᵢ‖u‖ − gᵢᵀu + hᵢ`; nonpositive means satisfied.
    pub fn residual(&self, u: &[f64]) -> f64 {
        self.alpha * norm(u) - dot(&self.g, u) + self.h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocpProblem {
    pub dim: usize,
    pub rows: Vec<SocpRow>,
}

impl SocpProblem {
    pub fn new(dim: usize, rows: Vec<SocpRow>) -> Self {
        Self { dim, rows }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("problem dimension must be positive"));
        }
        if self.rows.is_empty() {
            return Err(invalid("problem needs at least one constraint row"));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.g.len() != self.dim {
                return Err(invalid(format!("row {i}: g has length {}, expected {}", row.g.len(), self.dim)));
            }
            if !(row.alpha >= 0.0) || !row.alpha.is_finite() {
                return Err(invalid(format!("row {i}: alpha must be finite and nonnegative, got {}", row.alpha)));
            }
            if !row.h.is_finite() || row.g.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("row {i}: non-finite data")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SocpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocpSolution {
    pub u: Vec<f64>,
    pub status: SocpStatus,
    pub objective: f64,
    pub iterations: usize,
    pub max_violation: f64,
}

impl SocpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SocpStatus::Optimal
    }
}

/// Backend interface; solves are independent and may run concurrently.
pub trait SocpSolver: Send + Sync {
    fn solve(&self, problem: &SocpProblem) -> SocpSolution;
}

/// Solves with the reference barrier method at tolerance `tol`.
pub fn solve(problem: &SocpProblem, tol: f64) -> Result<SocpSolution> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    problem.validate()?;
    Ok(BarrierSolver::with_tol(tol).solve(problem))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    pub max_violation: f64,
    /// `‖2u + Σ λᵢ∇fᵢ(u)‖ / ‖2u‖` with `λ ⪰ 0` fit on the active rows.
    pub stationarity_residual: f64,
    pub active_rows: usize,
}

/// Primal feasibility and a least-squares KKT stationarity check.
pub fn verify(problem: &SocpProblem, u: &[f64]) -> Verification {
    let max_violation = problem.rows.iter().map(|r| r.residual(u).max(0.0)).fold(0.0, f64::max);

    let unorm = norm(u);
    if unorm == 0.0 {
        // ∇‖u‖² vanishes at the origin; the zero multiplier is exact.
        return Verification { max_violation, stationarity_residual: 0.0, active_rows: 0 };
    }

    let active: Vec<&SocpRow> = problem
        .rows
        .iter()
        .filter(|r| {
            let scale = (1.0 + unorm) * (1.0 + norm(&r.g) + r.alpha);
            r.residual(u) >= -1e-6 * scale
        })
        .collect();

    let grad = DVector::from_iterator(u.len(), u.iter().map(|v| 2.0 * v));
    let residual = if active.is_empty() {
        grad.norm()
    } else {
        // Columns are ∇fᵢ(u) = αᵢu/‖u‖ − gᵢ; solve min ‖Bλ + 2u‖ over λ ⪰ 0.
        let b = DMatrix::from_fn(u.len(), active.len(), |i, j| active[j].alpha * u[i] / unorm - active[j].g[i]);
        let lambda = nnls(&b, &(-&grad));
        (&b * lambda + &grad).norm()
    };

    Verification { max_violation, stationarity_residual: residual / grad.norm(), active_rows: active.len() }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
