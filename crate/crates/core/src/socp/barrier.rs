//! Log-barrier interior-point method for the structured conic program.
//!
//! The norm is lifted into an epigraph variable `t ≥ ‖u‖`, turning
//! `min ‖u‖²` into `min t` over `x = (u, t)` with linear rows
//! `gᵢᵀu − αᵢt − hᵢ > 0` and the second-order cone barrier
//! `−log(t² − ‖u‖²)`. A phase-I problem with an extra slack variable `s`
//! finds a strictly feasible start or certifies infeasibility.

use nalgebra::{DMatrix, DVector};

use super::{verify, SocpProblem, SocpSolution, SocpSolver, SocpStatus, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSolver {
    /// Relative objective accuracy and feasibility tolerance.
    pub tol: f64,
    /// Barrier weight multiplier between centering stages.
    pub mu: f64,
    /// Newton steps allowed per centering stage.
    pub max_newton: usize,
    pub max_stages: usize,
}

impl Default for BarrierSolver {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, mu: 10.0, max_newton: 50, max_stages: 60 }
    }
}

impl BarrierSolver {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

impl SocpSolver for BarrierSolver {
    fn solve(&self, problem: &SocpProblem) -> SocpSolution {
        let n = problem.dim;
        // u = 0 is feasible, hence optimal, when no threshold is positive.
        if problem.rows.iter().all(|r| r.h <= 0.0) {
            return finish(problem, vec![0.0; n], SocpStatus::Optimal, 0);
        }

        let mut iterations = 0;
        let start = match phase_one(problem, self, &mut iterations) {
            PhaseOne::Feasible(x) => x,
            PhaseOne::Infeasible => return finish(problem, vec![0.0; n], SocpStatus::Infeasible, iterations),
            PhaseOne::Failed(x) => {
                return finish(problem, x.as_slice()[..n].to_vec(), SocpStatus::NumericalFailure, iterations)
            }
        };

        let mut rows = Vec::with_capacity(problem.rows.len());
        for r in &problem.rows {
            let mut c = DVector::zeros(n + 1);
            c.rows_mut(0, n).copy_from_slice(&r.g);
            c[n] = -r.alpha;
            rows.push((c, r.h));
        }
        let mut objective = DVector::zeros(n + 1);
        objective[n] = 1.0;
        let barrier = Barrier { n, rows, objective, t_upper: None };

        let mut x = start;
        let nu = barrier.degree();
        let mut tau = nu / x[n].max(f64::MIN_POSITIVE);
        for _ in 0..self.max_stages {
            match barrier.center(&mut x, tau, self.max_newton, |_| false) {
                Centering::Done(steps) => iterations += steps,
                Centering::Failed(steps) => {
                    iterations += steps;
                    return finish(problem, x.as_slice()[..n].to_vec(), SocpStatus::NumericalFailure, iterations);
                }
            }
            // t − t* ≤ ν/τ at the central point; this bounds the relative
            // error of t² by roughly tol/2.
            if nu / tau <= 0.25 * self.tol * x[n] {
                let u = x.as_slice()[..n].to_vec();
                let status = if verify(problem, &u).max_violation <= self.tol * (1.0 + super::norm(&u)) {
                    SocpStatus::Optimal
                } else {
                    SocpStatus::NumericalFailure
                };
                return finish(problem, u, status, iterations);
            }
            tau *= self.mu;
        }
        finish(problem, x.as_slice()[..n].to_vec(), SocpStatus::NumericalFailure, iterations)
    }
}

fn finish(problem: &SocpProblem, u: Vec<f64>, status: SocpStatus, iterations: usize) -> SocpSolution {
    let objective = super::dot(&u, &u);
    let max_violation = problem.rows.iter().map(|r| r.residual(&u).max(0.0)).fold(0.0, f64::max);
    SocpSolution { u, status, objective, iterations, max_violation }
}

enum PhaseOne {
    Feasible(DVector<f64>),
    Infeasible,
    Failed(DVector<f64>),
}

/// Minimizes `s` over `(u, t, s)` subject to `gᵢᵀu − αᵢt − hᵢ + s > 0`,
/// `‖u‖ < t < R`. Stops at the first iterate with `s < 0`.
fn phase_one(problem: &SocpProblem, opts: &BarrierSolver, iterations: &mut usize) -> PhaseOne {
    let n = problem.dim;
    let scale = problem.rows.iter().map(|r| r.h.abs() / super::norm(&r.g).max(f64::MIN_POSITIVE)).fold(1.0, f64::max);
    let t_upper = 1e8 * scale;

    let mut rows = Vec::with_capacity(problem.rows.len());
    for r in &problem.rows {
        let mut c = DVector::zeros(n + 2);
        c.rows_mut(0, n).copy_from_slice(&r.g);
        c[n] = -r.alpha;
        c[n + 1] = 1.0;
        rows.push((c, r.h));
    }
    let mut objective = DVector::zeros(n + 2);
    objective[n + 1] = 1.0;
    let barrier = Barrier { n, rows, objective, t_upper: Some(t_upper) };

    // u = 0, t = 1 and s large enough that every row has unit slack.
    let mut x = DVector::zeros(n + 2);
    x[n] = 1.0;
    x[n + 1] = problem.rows.iter().map(|r| r.h + r.alpha).fold(f64::NEG_INFINITY, f64::max) + 1.0;

    let nu = barrier.degree();
    let h_scale = 1.0 + problem.rows.iter().map(|r| r.h.abs()).fold(0.0, f64::max);
    let mut tau = nu / x[n + 1].abs().max(1.0);
    for _ in 0..opts.max_stages {
        let found = |x: &DVector<f64>| x[n + 1] < 0.0;
        match barrier.center(&mut x, tau, opts.max_newton, found) {
            Centering::Done(steps) => *iterations += steps,
            Centering::Failed(steps) => {
                *iterations += steps;
                return PhaseOne::Failed(x);
            }
        }
        let s = x[n + 1];
        if s < 0.0 {
            return PhaseOne::Feasible(x.rows(0, n + 1).into_owned());
        }
        // s* ≥ s − ν/τ at the central point.
        if s - nu / tau > 0.0 || nu / tau <= opts.tol * h_scale {
            return PhaseOne::Infeasible;
        }
        tau *= opts.mu;
    }
    PhaseOne::Failed(x)
}

enum Centering {
    Done(usize),
    Failed(usize),
}

/// `τ·fᵀx − Σ log(cᵢᵀx − dᵢ) − log(t² − ‖u‖²) [− log(R − t)]` with
/// `u = x[..n]`, `t = x[n]`.
struct Barrier {
    n: usize,
    rows: Vec<(DVector<f64>, f64)>,
    objective: DVector<f64>,
    t_upper: Option<f64>,
}

impl Barrier {
    fn degree(&self) -> f64 {
        (self.rows.len() + 2 + usize::from(self.t_upper.is_some())) as f64
    }

    fn cone_gap(&self, x: &DVector<f64>) -> f64 {
        let t = x[self.n];
        let unorm = x.rows(0, self.n).norm();
        (t - unorm) * (t + unorm)
    }

    fn in_domain(&self, x: &DVector<f64>) -> bool {
        x[self.n] > 0.0
            && self.cone_gap(x) > 0.0
            && self.rows.iter().all(|(c, d)| c.dot(x) - d > 0.0)
            && self.t_upper.is_none_or(|r| r - x[self.n] > 0.0)
            && x.iter().all(|v| v.is_finite())
    }

    fn gradient_hessian(&self, x: &DVector<f64>, tau: f64) -> (DVector<f64>, DMatrix<f64>) {
        let dim = x.len();
        let n = self.n;
        let mut grad = &self.objective * tau;
        let mut hess = DMatrix::zeros(dim, dim);

        for (c, d) in &self.rows {
            let slack = c.dot(x) - d;
            grad.axpy(-1.0 / slack, c, 1.0);
            hess.ger(1.0 / (slack * slack), c, c, 1.0);
        }

        // −log(w), w = t² − uᵀu = xᵀJx with J = diag(−I, 1).
        let w = self.cone_gap(x);
        let mut jx = DVector::zeros(dim);
        for i in 0..n {
            jx[i] = -x[i];
        }
        jx[n] = x[n];
        grad.axpy(-2.0 / w, &jx, 1.0);
        hess.ger(4.0 / (w * w), &jx, &jx, 1.0);
        for i in 0..n {
            hess[(i, i)] += 2.0 / w;
        }
        hess[(n, n)] -= 2.0 / w;

        if let Some(r) = self.t_upper {
            let gap = r - x[n];
            grad[n] += 1.0 / gap;
            hess[(n, n)] += 1.0 / (gap * gap);
        }
        (grad, hess)
    }

    /// Damped Newton centering. The step `1/(1+λ)` stays inside the Dikin
    /// ellipsoid of a self-concordant barrier, so no function values are
    /// compared (they lose precision once τ is large).
    fn center(
        &self,
        x: &mut DVector<f64>,
        tau: f64,
        max_steps: usize,
        stop: impl Fn(&DVector<f64>) -> bool,
    ) -> Centering {
        for step in 1..=max_steps {
            let (grad, hess) = self.gradient_hessian(x, tau);
            let Some(dx) = newton_direction(hess, &grad) else {
                return Centering::Failed(step);
            };
            let decrement = -grad.dot(&dx);
            if !decrement.is_finite() {
                return Centering::Failed(step);
            }
            if decrement <= 1e-14 {
                return Centering::Done(step);
            }
            let lambda = decrement.max(0.0).sqrt();
            let mut size = if lambda > 0.25 { 1.0 / (1.0 + lambda) } else { 1.0 };
            let mut candidate = &*x + &dx * size;
            while !self.in_domain(&candidate) {
                size *= 0.5;
                if size < 1e-16 {
                    return Centering::Failed(step);
                }
                candidate = &*x + &dx * size;
            }
            *x = candidate;
            if stop(x) || (lambda <= 0.25 && decrement <= 1e-12) {
                return Centering::Done(step);
            }
        }
        // Not fully centered, but still strictly feasible; the next stage
        // picks up from here.
        Centering::Done(max_steps)
    }
}

fn newton_direction(hess: DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let rhs = -grad;
    if let Some(chol) = hess.clone().cholesky() {
        let dx = chol.solve(&rhs);
        if dx.iter().all(|v| v.is_finite()) {
            return Some(dx);
        }
    }
    // Rounding can cost positive definiteness at extreme barrier weights.
    let ridge = 1e-12 * hess.diagonal().amax().max(1.0);
    let mut regularized = hess;
    for i in 0..regularized.nrows() {
        regularized[(i, i)] += ridge;
    }
    regularized.cholesky().map(|c| c.solve(&rhs)).filter(|dx| dx.iter().all(|v| v.is_finite()))
}
