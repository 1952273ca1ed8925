//! Self-check suite run by `slp validate`.
//!
//! Each check compares a library routine with an independent computation
//! (Monte-Carlo, closed form or exhaustive search) and reports the measured
//! discrepancy next to its tolerance.

use nalgebra::{DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::channel::{
    realize, sample_error_gaussian, sample_error_spherical, t_expand, ChannelRealization, UncertaintyModel,
};
use crate::constellation::Constellation;
use crate::dpcir::{dpcir_for, inv_sqrt_gram, psi, CirDescriptor, Psi};
use crate::error::Result;
use crate::precoders::{
    build_nonrobust, build_stochastic_with, build_worstcase, chance_product_bound, ci_violation_mc,
    ci_violation_mc_with, erf, erf_inv, rho, structured_minimizer, unstructured_minimizer, upsilon_covariance,
    wc_infimum_structured, wc_infimum_unstructured, ScenarioInputs, StochasticForm,
};
use crate::sim::matched_delta;
use crate::socp::{norm, solve, verify, SocpProblem, SocpRow, SocpStatus, DEFAULT_TOL};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    pub quick: bool,
    pub seed: u64,
    /// Negative control: design the stochastic precoder with `+|ρ|` margins.
    pub flip_rho_sign: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { quick: false, seed: 1, flip_rho_sign: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    /// Informational lines (not pass/fail).
    pub notes: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run(opts: &ValidateOptions) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    checks.push(erf_check());
    checks.push(rho_check(opts));
    checks.push(covariance_check(opts, &mut rng));
    checks.push(infimum_check(opts, &mut rng));
    checks.push(solver_check(opts, &mut rng));
    checks.push(reduction_check(opts, &mut rng));
    checks.push(worst_case_check(opts, &mut rng));
    checks.push(violation_check(opts, &mut rng));
    checks.push(product_check(opts, &mut rng));
    notes.extend(decorrelation_gap(opts, &mut rng));
    Report { checks, notes }
}

fn erf_check() -> Check {
    let n = 10_000;
    let (lo, hi) = (-1.0 + 1e-9, 1.0 - 1e-9);
    let worst =
        (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).map(|y| (erf(erf_inv(y)) - y).abs()).fold(0.0, f64::max);
    Check::new("erf round trip", worst <= 1e-12, format!("max |erf(erf⁻¹(y)) − y| = {worst:.2e} (≤ 1e-12)"))
}

/// `erf⁻¹` by bisection on `erf`; independent of the Newton inverse.
fn erf_inv_bisect(y: f64) -> f64 {
    let (mut lo, mut hi) = (-7.0, 7.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if erf(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn signed_margin(opts: &ValidateOptions, epsilon: f64) -> f64 {
    let r = rho(epsilon).unwrap_or(f64::NAN);
    if opts.flip_rho_sign {
        -r
    } else {
        r
    }
}

fn rho_check(opts: &ValidateOptions) -> Check {
    let r = signed_margin(opts, 0.01);
    let oracle = erf_inv_bisect(1.0 - 2.0 * 0.99f64.sqrt());
    let at_three_quarters = rho(0.75).unwrap_or(f64::NAN);
    let passed = (r - oracle).abs() <= 1e-10 && at_three_quarters == 0.0;
    Check::new(
        "rho(epsilon)",
        passed,
        format!("ρ(0.01) = {r:.10} vs bisection {oracle:.10}; ρ(0.75) = {at_three_quarters}"),
    )
}

fn random_u<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_descriptor<R: Rng>(rng: &mut R) -> CirDescriptor {
    let order = [4usize, 8, 16][rng.random_range(0..3)];
    let c = Constellation::mpsk(order).expect("order ≥ 2");
    let m = c.symbol(rng.random_range(0..order)).expect("in range");
    dpcir_for(&c, m)
}

fn covariance_check<R: Rng>(opts: &ValidateOptions, rng: &mut R) -> Check {
    let (triples, samples, tol) = if opts.quick { (3, 40_000, 0.05) } else { (20, 1_000_000, 0.01) };
    let mut worst: f64 = 0.0;
    for _ in 0..triples {
        let d = random_descriptor(rng);
        let u = random_u(8, rng);
        let xi = rng.random_range(0.05..0.5);
        let uv = DVector::from_column_slice(&u);
        let mut acc = Matrix2::zeros();
        for _ in 0..samples {
            let v: Vector2<f64> = d.a * t_expand(&sample_error_gaussian(4, xi, rng)) * &uv;
            acc += v * v.transpose();
        }
        acc /= samples as f64;
        let expect = upsilon_covariance(&d, &u, xi);
        worst = worst.max((acc - expect).norm() / expect.norm());
    }
    Check::new(
        "upsilon covariance",
        worst <= tol,
        format!("{triples} triples × {samples} draws: max relative Frobenius error {worst:.4} (≤ {tol})"),
    )
}

fn infimum_check<R: Rng>(opts: &ValidateOptions, rng: &mut R) -> Check {
    let (cases, samples) = if opts.quick { (5, 20_000) } else { (10, 1_000_000) };
    let mut attain: f64 = 0.0;
    let mut beaten = 0usize;
    for _ in 0..cases {
        let a = Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let u = random_u(8, rng);
        let uv = DVector::from_column_slice(&u);
        let delta = rng.random_range(0.01..1.0);
        let unstructured = wc_infimum_unstructured(&a, &u, delta);
        let structured = wc_infimum_structured(&a, &u, delta);
        let m = unstructured_minimizer(&a, &u, delta);
        attain = attain.max(((a.transpose() * &m * &uv)[0] - unstructured).abs());
        let e = structured_minimizer(&a, &u, delta);
        attain = attain.max(((a.transpose() * t_expand(&e) * &uv)[0] - structured).abs());
        if structured < unstructured {
            beaten += 1;
        }
        for _ in 0..samples {
            let mut m = crate::channel::RealLift::from_fn(8, |_, _| StandardNormal.sample(rng));
            m *= delta / m.norm();
            if (a.transpose() * &m * &uv)[0] < unstructured - 1e-12 {
                beaten += 1;
            }
            let e = sample_error_spherical(4, delta, rng);
            if (a.transpose() * t_expand(&e) * &uv)[0] < structured - 1e-12 {
                beaten += 1;
            }
        }
    }
    Check::new(
        "worst-case infima",
        attain <= 1e-9 && beaten == 0,
        format!("minimizer gap {attain:.2e} (≤ 1e-9); {beaten} samples below the infimum over {cases}×{samples}"),
    )
}

/// Exact 2-D minimum norm: for each direction the feasible radii form an
/// interval; take its left end, scan directions, then refine.
pub fn polar_min(problem: &SocpProblem) -> Option<f64> {
    let radius_at = |theta: f64| -> Option<f64> {
        let (c, s) = (theta.cos(), theta.sin());
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        for row in &problem.rows {
            let slope = row.g[0] * c + row.g[1] * s - row.alpha;
            if slope > 0.0 {
                lo = lo.max(row.h / slope);
            } else if slope < 0.0 {
                hi = hi.min(row.h / slope);
            } else if row.h > 0.0 {
                return None;
            }
        }
        (lo <= hi).then_some(lo)
    };
    if problem.rows.iter().all(|r| r.h <= 0.0) {
        return Some(0.0);
    }
    let n = 20_000;
    let step = std::f64::consts::TAU / n as f64;
    let (mut best, mut best_theta) = (f64::INFINITY, 0.0);
    for i in 0..n {
        let theta = i as f64 * step;
        if let Some(r) = radius_at(theta) {
            if r < best {
                best = r;
                best_theta = theta;
            }
        }
    }
    if !best.is_finite() {
        return None;
    }
    // Re-grid around the best direction; this also converges onto corners
    // where the feasible radii pinch off and the radius jumps to infinity.
    let f = |t: f64| radius_at(t).unwrap_or(f64::INFINITY);
    let mut width = step;
    for _ in 0..10 {
        let m = 100;
        for j in 0..=m {
            let t = best_theta - width + 2.0 * width * j as f64 / m as f64;
            let r = f(t);
            if r < best {
                best = r;
                best_theta = t;
            }
        }
        width /= 40.0;
    }
    Some(best * best)
}

/// Random 2-D problem with a strictly feasible point.
pub fn random_planar_problem<R: Rng>(rng: &mut R) -> SocpProblem {
    let rows = rng.random_range(1..=4);
    let center = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
    let rows = (0..rows)
        .map(|_| {
            let g = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let alpha = rng.random_range(0.0..0.5) * norm(&g);
            let slack = rng.random_range(0.01..1.0);
            let h = g[0] * center[0] + g[1] * center[1] - alpha * norm(&center) - slack;
            SocpRow::new(alpha, g, h)
        })
        .collect();
    SocpProblem::new(2, rows)
}

fn solver_check<R: Rng>(opts: &ValidateOptions, rng: &mut R) -> Check {
    let count = if opts.quick { 50 } else { 500 };
    let (mut worst_gap, mut worst_kkt, mut failures): (f64, f64, usize) = (0.0, 0.0, 0);
    for _ in 0..count {
        let p = random_planar_problem(rng);
        let sol = match solve(&p, DEFAULT_TOL) {
            Ok(s) if s.status == SocpStatus::Optimal => s,
            _ => {
                failures += 1;
                continue;
            }
        };
        let Some(oracle) = polar_min(&p) else {
            failures += 1;
            continue;
        };
        let gap = (sol.objective - oracle).abs() / oracle.max(1e-12);
        worst_gap = worst_gap.max(if oracle == 0.0 { sol.objective } else { gap });
        worst_kkt = worst_kkt.max(verify(&p, &sol.u).max_violation);
    }
    Check::new(
        "solver vs polar oracle",
        failures == 0 && worst_gap <= 1e-3 && worst_kkt <= 1e-6,
        format!("{count} problems: max rel. gap {worst_gap:.2e} (≤ 1e-3), max violation {worst_kkt:.2e} (≤ 1e-6), {failures} failures"),
    )
}

/// Descriptors and thresholds for `k` random 8-PSK symbols at linear SINR `gamma`.
fn random_slot<R: Rng>(k: usize, gamma: f64, rng: &mut R) -> (Vec<CirDescriptor>, Vec<Psi>) {
    let c = Constellation::mpsk(8).expect("order ≥ 2");
    let d: Vec<_> = (0..k).map(|_| dpcir_for(&c, c.symbol(rng.random_range(0..8)).expect("in range"))).collect();
    let p = d.iter().map(|d| psi(d, 1.0, gamma).expect("valid")).collect();
    (d, p)
}

fn inputs(
    real: &ChannelRealization,
    d: &[CirDescriptor],
    p: &[Psi],
    model: UncertaintyModel,
    eps: f64,
) -> Result<ScenarioInputs> {
    ScenarioInputs::new(real.estimate_lifts.clone(), d.to_vec(), p.to_vec(), model, eps)
}

fn reduction_check<R: Rng>(opts: &ValidateOptions, rng: &mut R) -> Check {
    let count = if opts.quick { 10 } else { 100 };
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..count {
        let real = realize(4, 4, &UncertaintyModel::Stochastic { xi: 0.05 }, rng).expect("valid model");
        let (d, p) = random_slot(4, 10.0, rng);
        let compare = |model: UncertaintyModel, eps: f64| -> Result<Option<f64>> {
            let s = inputs(&real, &d, &p, model, eps)?;
            let robust = match model {
                UncertaintyModel::Spherical { .. } => build_worstcase(&s)?,
                _ => build_stochastic_with(&s, StochasticForm::PerRow)?,
            };
            let base = solve(&build_nonrobust(&s)?, DEFAULT_TOL)?;
            let sol = solve(&robust, DEFAULT_TOL)?;
            if base.is_optimal() && sol.is_optimal() {
                Ok(Some((sol.objective - base.objective).abs() / base.objective))
            } else if base.status == sol.status {
                Ok(Some(0.0))
            } else {
                Ok(None)
            }
        };
        let cases = [
            (UncertaintyModel::Spherical { delta: 0.0 }, 0.01),
            (UncertaintyModel::Stochastic { xi: 0.0 }, 0.01),
            (UncertaintyModel::Stochastic { xi: 0.05 }, 0.75),
        ];
        for (model, eps) in cases {
            match compare(model, eps) {
                Ok(Some(gap)) => worst = worst.max(gap),
                _ => failures += 1,
            }
        }
    }
    Check::new(
        "reduction identities",
        failures == 0 && worst <= 1e-6,
        format!("{count} instances × 3 reductions: max relative power gap {worst:.2e} (≤ 1e-6), {failures} mismatches"),
    )
}

fn worst_case_check<R: Rng>(opts: &ValidateOptions, rng: &mut R) -> Check {
    let (slots, draws) = if opts.quick { (10, 1_000) } else { (50, 10_000) };
    let delta = matched_delta(4, 0.05);
    let model = UncertaintyModel::Spherical { delta };
    let (mut feasible, mut violations) = (0usize, 0usize);
    for _ in 0..slots {
        let real = realize(4, 4, &model, rng).expect("valid model");
        let (d, p) = random_slot(4, 10.0, rng);
        let Ok(s) = inputs(&real, &d, &p, model, 0.01) else { continue };
        let Ok(sol) = build_worstcase(&s).and_then(|prob| solve(&prob, DEFAULT_TOL)) else { continue };
        if !sol.is_optimal() {
            continue;
        }
        feasible += 1;
        for k in 0..4 {
            let h = &real.estimate_lifts[k];
            let rate = ci_violation_mc(&d[k], &p[k], h, &sol.u, &model, draws, rng);
            violations += (rate * draws as f64).round() as usize;
            for row in d[k].rows() {
                let adversary = structured_minimizer(&row.normal, &sol.u, delta);
                let rate = ci_violation_mc_with(&d[k], &p[k], h, &sol.u, 1, rng, |_| adversary.clone());
                violations += rate as usize;
            }
        }
    }
    Check::new(
        "worst-case guarantee",
        feasible > 0 && violations == 0,
        format!(
            "{feasible}/{slots} feasible slots, {draws} ball draws + adversarial per user: {violations} violations"
        ),
    )
}

fn violation_check<R: Rng>(opts: &ValidateOptions, rng: &mut R) -> Check {
    let (slots, draws) = if opts.quick { (10, 2_000) } else { (50, 10_000) };
    let xi = 0.05;
    let eps = 0.01;
    let model = UncertaintyModel::Stochastic { xi };
    let stderr = (eps * (1.0 - eps) / draws as f64).sqrt();
    let (mut feasible, mut within, mut worst, mut rejected) = (0usize, 0usize, 0.0f64, 0usize);
    for _ in 0..slots {
        let real = realize(4, 4, &model, rng).expect("valid model");
        let (d, p) = random_slot(4, 10.0, rng);
        let Ok(s) = inputs(&real, &d, &p, model, eps) else { continue };
        let Ok(mut problem) = build_stochastic_with(&s, StochasticForm::PerRow) else {
            rejected += 1;
            continue;
        };
        if opts.flip_rho_sign {
            let alpha = std::f64::consts::SQRT_2 * signed_margin(opts, eps).abs() * xi;
            problem.rows.iter_mut().for_each(|r| r.alpha = -alpha);
        }
        let sol = match solve(&problem, DEFAULT_TOL) {
            Ok(sol) if sol.is_optimal() => sol,
            Ok(_) => continue,
            Err(_) => {
                rejected += 1;
                continue;
            }
        };
        feasible += 1;
        let rate = (0..4)
            .map(|k| ci_violation_mc(&d[k], &p[k], &real.estimate_lifts[k], &sol.u, &model, draws, rng))
            .fold(0.0, f64::max);
        worst = worst.max(rate);
        if rate <= eps + 3.0 * stderr {
            within += 1;
        }
    }
    let share = if feasible == 0 { 0.0 } else { within as f64 / feasible as f64 };
    Check::new(
        "chance-constraint conservatism",
        rejected == 0 && feasible > 0 && share >= 0.95,
        format!(
            "{within}/{feasible} feasible slots with max user violation ≤ {:.4} (need ≥ 95%); worst {worst:.4}; {rejected} designs rejected",
            eps + 3.0 * stderr
        ),
    )
}

fn product_check<R: Rng>(opts: &ValidateOptions, rng: &mut R) -> Check {
    let (cases, draws) = if opts.quick { (5, 20_000) } else { (20, 200_000) };
    let (mut worst_z, mut ordered) = (0.0f64, true);
    for _ in 0..cases {
        let w = Vector2::new(rng.random_range(-1.0..0.5), rng.random_range(-1.0..0.5));
        let u = random_u(8, rng);
        let xi = rng.random_range(0.05..0.5);
        let Ok(b) = chance_product_bound(&w, &u, xi) else {
            ordered = false;
            continue;
        };
        ordered &= b.lower_bound <= b.product + 1e-15;
        let scale = xi * norm(&u);
        let hits = (0..draws)
            .filter(|_| {
                let z0: f64 = StandardNormal.sample(rng);
                let z1: f64 = StandardNormal.sample(rng);
                z0 >= w[0] / scale && z1 >= w[1] / scale
            })
            .count();
        let p = hits as f64 / draws as f64;
        let stderr = (b.product * (1.0 - b.product) / draws as f64).sqrt().max(1e-12);
        worst_z = worst_z.max((p - b.product).abs() / stderr);
    }
    Check::new(
        "product probability",
        ordered && worst_z <= 3.0,
        format!(
            "{cases} cases × {draws} pairs: max |MC − product| = {worst_z:.2} stderr (≤ 3); bound ≤ product: {ordered}"
        ),
    )
}

/// Empirical CI violation of both stochastic forms next to the design target.
fn decorrelation_gap<R: Rng>(opts: &ValidateOptions, rng: &mut R) -> Vec<String> {
    let (slots, draws) = if opts.quick { (5, 2_000) } else { (30, 10_000) };
    let xi = 0.05;
    let model = UncertaintyModel::Stochastic { xi };
    let mut lines = Vec::new();
    for eps in [0.01, 0.1] {
        for form in [StochasticForm::PerRow, StochasticForm::Decorrelated] {
            let (mut sum, mut count, mut predicted) = (0.0, 0usize, 0.0);
            for _ in 0..slots {
                let real = realize(4, 4, &model, rng).expect("valid model");
                let (d, p) = random_slot(4, 10.0, rng);
                let Ok(s) = inputs(&real, &d, &p, model, eps) else { continue };
                let Ok(sol) = build_stochastic_with(&s, form).and_then(|prob| solve(&prob, DEFAULT_TOL)) else {
                    continue;
                };
                if !sol.is_optimal() {
                    continue;
                }
                for k in 0..4 {
                    sum += ci_violation_mc(&d[k], &p[k], &real.estimate_lifts[k], &sol.u, &model, draws, rng);
                    let h = &real.estimate_lifts[k];
                    let omega = p[k].value - d[k].a * (h * DVector::from_column_slice(&sol.u));
                    if let Ok(w) = inv_sqrt_gram(&d[k]) {
                        if let Ok(b) = chance_product_bound(&(w * omega), &sol.u, xi) {
                            predicted += 1.0 - b.product;
                        }
                    }
                    count += 1;
                }
            }
            if count > 0 {
                let n = count as f64;
                lines.push(format!(
                    "decorrelation gap [{form:?}, ε = {eps}]: empirical violation {:.4}, whitened-product prediction {:.4}, over {count} user-slots",
                    sum / n,
                    predicted / n
                ));
            }
        }
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_oracle_examples() {
        // u₁ ≥ 1 and u₂ ≥ 1: optimum (1, 1).
        let p =
            SocpProblem::new(2, vec![SocpRow::new(0.0, vec![1.0, 0.0], 1.0), SocpRow::new(0.0, vec![0.0, 1.0], 1.0)]);
        assert!((polar_min(&p).unwrap() - 2.0).abs() < 1e-9);
        // u₁ ≥ 1 and u₁ ≤ −1: empty.
        let p =
            SocpProblem::new(2, vec![SocpRow::new(0.0, vec![1.0, 0.0], 1.0), SocpRow::new(0.0, vec![-1.0, 0.0], 1.0)]);
        assert!(polar_min(&p).is_none());
        let p = SocpProblem::new(2, vec![SocpRow::new(0.0, vec![1.0, 0.0], -1.0)]);
        assert_eq!(polar_min(&p), Some(0.0));
    }

    #[test]
    fn quick_suite_passes() {
        let report = run(&ValidateOptions { quick: true, ..Default::default() });
        for c in &report.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn flipped_rho_sign_fails() {
        let report = run(&ValidateOptions { quick: true, flip_rho_sign: true, ..Default::default() });
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert!(failed.contains(&"rho(epsilon)"));
        assert!(failed.contains(&"chance-constraint conservatism"));
    }
}
