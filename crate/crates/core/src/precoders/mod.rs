//! Builders for the non-robust, worst-case and chance-constrained power
//! minimization problems, plus the analytic and Monte-Carlo oracles that
//! back their derivations.
//!
//! Every builder emits rows of the canonical form `α‖u‖ ≤ gᵀu − h`:
//!
//! | design      | α                         | g                 | h     |
//! |-------------|---------------------------|-------------------|-------|
//! | non-robust  | 0                         | `(A Ĥ)_r`         | `ψ_r` |
//! | worst-case  | `δ‖a_r‖`                  | `(A Ĥ)_r`         | `ψ_r` |
//! | stochastic  | `√2·|ρ(ε)|·ξ`             | `(A Ĥ)_r`         | `ψ_r` |
//! | decorrelated| `√2·|ρ(ε)|·ξ`             | `(W A Ĥ)_r`       | `(WΨ)_r` |
//!
//! with `W = (A Aᵀ)^{-1/2}`.

mod oracles;
pub mod special;

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, RowDVector};
use serde::Serialize;

use crate::channel::{RealLift, UncertaintyModel};
use crate::dpcir::{inv_sqrt_gram, CirDescriptor, Psi};
use crate::error::{invalid, Result};
use crate::socp::{SocpProblem, SocpRow};

pub use oracles::{
    chance_product_bound, ci_violation_mc, ci_violation_mc_with, structured_minimizer, unstructured_minimizer,
    upsilon_covariance, wc_infimum_structured, wc_infimum_unstructured, ChanceBound, CI_TOL,
};
pub use special::{erf, erf_inv, rho, rho_single_row};

/// Everything a builder needs for one symbol slot.
#[derive(Debug, Clone)]
pub struct ScenarioInputs {
    pub estimates: Vec<RealLift>,
    pub descriptors: Vec<CirDescriptor>,
    pub psis: Vec<Psi>,
    pub model: UncertaintyModel,
    pub epsilon: f64,
}

impl ScenarioInputs {
    pub fn new(
        estimates: Vec<RealLift>,
        descriptors: Vec<CirDescriptor>,
        psis: Vec<Psi>,
        model: UncertaintyModel,
        epsilon: f64,
    ) -> Result<Self> {
        let inputs = Self { estimates, descriptors, psis, model, epsilon };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.estimates.len();
        if k == 0 {
            return Err(invalid("scenario has no users"));
        }
        if self.descriptors.len() != k || self.psis.len() != k {
            return Err(invalid(format!(
                "{} channels, {} descriptors, {} thresholds",
                k,
                self.descriptors.len(),
                self.psis.len()
            )));
        }
        let cols = self.estimates[0].ncols();
        if cols == 0 || !cols.is_multiple_of(2) || self.estimates.iter().any(|h| h.ncols() != cols) {
            return Err(invalid("channel lifts must share an even, nonzero column count"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        self.model.validate()
    }

    /// Length of the real transmit vector, `2N`.
    pub fn dim(&self) -> usize {
        self.estimates[0].ncols()
    }

    pub fn users(&self) -> usize {
        self.estimates.len()
    }
}

/// How the stochastic design turns the chance constraint into cone rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StochasticForm {
    /// Margin applied to each DPCIR row of `AĤu − Ψ`. Each row fails with
    /// probability `1 − √(1−ε)`, so the union bound caps the CI violation
    /// at `2(1 − √(1−ε))`.
    #[default]
    PerRow,
    /// Margin applied after whitening by `(AAᵀ)^{-1/2}`. Matches the
    /// per-row form when `AAᵀ = I`; for other orders the whitened orthant
    /// is larger than the DPCIR and the violation bound does not hold.
    Decorrelated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecoderKind {
    /// Non-robust design on the true channels.
    Perfect,
    NonRobust,
    WorstCase,
    Stochastic,
}

impl PrecoderKind {
    pub const ALL: [PrecoderKind; 4] =
        [PrecoderKind::Perfect, PrecoderKind::NonRobust, PrecoderKind::WorstCase, PrecoderKind::Stochastic];

    pub fn name(self) -> &'static str {
        match self {
            PrecoderKind::Perfect => "perfect",
            PrecoderKind::NonRobust => "nonrobust",
            PrecoderKind::WorstCase => "worstcase",
            PrecoderKind::Stochastic => "stochastic",
        }
    }
}

impl fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrecoderKind {
    type Err = crate::error::SlpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perfect" => Ok(PrecoderKind::Perfect),
            "nonrobust" | "non-robust" => Ok(PrecoderKind::NonRobust),
            "worstcase" | "worst-case" => Ok(PrecoderKind::WorstCase),
            "stochastic" => Ok(PrecoderKind::Stochastic),
            other => Err(invalid(format!("unknown precoder '{other}'"))),
        }
    }
}

fn row_of(m: &RowDVector<f64>) -> Vec<f64> {
    m.iter().copied().collect()
}

/// Assembles `(α_k, g = (T·Ĥ_k)_r, h = (T·Ψ_k)_r)` over users and distinct
/// rows, where `T` is the per-user row transform.
fn assemble(
    s: &ScenarioInputs,
    alpha: impl Fn(usize, &CirDescriptor, usize) -> f64,
    transform: impl Fn(&CirDescriptor) -> Result<Matrix2<f64>>,
) -> Result<SocpProblem> {
    s.validate()?;
    let mut rows = Vec::with_capacity(2 * s.users());
    for (k, ((h, d), psi)) in s.estimates.iter().zip(&s.descriptors).zip(&s.psis).enumerate() {
        let t = transform(d)?;
        let g = t * d.a * h;
        let thresholds = t * psi.value;
        for r in 0..d.distinct_rows() {
            rows.push(SocpRow::new(alpha(k, d, r), row_of(&g.row(r).into_owned()), thresholds[r]));
        }
    }
    Ok(SocpProblem::new(s.dim(), rows))
}

/// Non-robust design: `A_k Ĥ_k u ⪰ Ψ_k`. With true channels in place of
/// the estimates this is the perfect-CSI problem.
pub fn build_nonrobust(s: &ScenarioInputs) -> Result<SocpProblem> {
    assemble(s, |_, _, _| 0.0, |_| Ok(Matrix2::identity()))
}

/// Worst-case design over the real-lift ball `‖Δ_k‖_F ≤ δ`.
pub fn build_worstcase(s: &ScenarioInputs) -> Result<SocpProblem> {
    let UncertaintyModel::Spherical { delta } = s.model else {
        return Err(invalid(format!("worst-case design needs a spherical model, got {:?}", s.model)));
    };
    assemble(s, |_, d, r| delta * Matrix2::row(&d.a, r).norm(), |_| Ok(Matrix2::identity()))
}

/// Chance-constrained design in the default [`StochasticForm::PerRow`].
pub fn build_stochastic(s: &ScenarioInputs) -> Result<SocpProblem> {
    build_stochastic_with(s, StochasticForm::PerRow)
}

pub fn build_stochastic_with(s: &ScenarioInputs, form: StochasticForm) -> Result<SocpProblem> {
    let UncertaintyModel::Stochastic { xi } = s.model else {
        return Err(invalid(format!("stochastic design needs a Gaussian model, got {:?}", s.model)));
    };
    s.validate()?;
    let two_row_margin = stochastic_margin(s.epsilon, 2)?;
    let one_row_margin =
        if s.descriptors.iter().any(|d| d.distinct_rows() == 1) { stochastic_margin(s.epsilon, 1)? } else { 0.0 };
    let alpha = |_: usize, d: &CirDescriptor, _: usize| {
        let margin = if d.distinct_rows() == 1 { one_row_margin } else { two_row_margin };
        std::f64::consts::SQRT_2 * margin * xi
    };
    match form {
        StochasticForm::PerRow => assemble(s, alpha, |_| Ok(Matrix2::identity())),
        StochasticForm::Decorrelated => {
            assemble(s, alpha, |d| if d.distinct_rows() == 1 { Ok(Matrix2::identity()) } else { inv_sqrt_gram(d) })
        }
    }
}

/// `|ρ|` for a region with `rows` half-planes, rejecting ε where the
/// margin would turn positive and the constraint stop being a cone.
pub fn stochastic_margin(epsilon: f64, rows: usize) -> Result<f64> {
    let (r, limit) = if rows == 1 { (rho_single_row(epsilon)?, 0.5) } else { (rho(epsilon)?, 0.75) };
    if epsilon > limit {
        return Err(invalid(format!("epsilon {epsilon} exceeds {limit}: the chance constraint is no longer convex")));
    }
    Ok(-r)
}

/// Builds the problem for `kind`. The perfect design expects `s.estimates`
/// to hold the true channels.
pub fn build(kind: PrecoderKind, s: &ScenarioInputs) -> Result<SocpProblem> {
    match kind {
        PrecoderKind::Perfect | PrecoderKind::NonRobust => build_nonrobust(s),
        PrecoderKind::WorstCase => build_worstcase(s),
        PrecoderKind::Stochastic => build_stochastic(s),
    }
}
