//! Monte-Carlo evaluation over fading blocks and symbol slots.
//!
//! Each block owns a ChaCha stream derived from `(seed, block)`. The channel,
//! its estimation error, the slot symbols and the receiver noise are drawn
//! once per block and shared by every SINR threshold and every precoder, so
//! all designs are compared on identical realizations.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{realize, ChannelRealization, RealLift, UncertaintyModel};
use crate::constellation::{Constellation, SymbolIndex};
use crate::dpcir::{dpcir_for, psi, CirDescriptor};
use crate::error::{invalid, Result, SlpError};
use crate::precoders::{build, build_stochastic_with, PrecoderKind, ScenarioInputs, StochasticForm};
use crate::socp::{solve, SocpSolution, DEFAULT_TOL};

/// Which slots enter the power, SER and efficiency averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// Slots feasible for every precoder in the sweep.
    #[default]
    Common,
    /// Each precoder over its own feasible slots.
    PerPrecoder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub antennas: usize,
    pub users: usize,
    pub order: usize,
    pub gamma_db: Vec<f64>,
    /// Noise standard deviation used for the design thresholds.
    pub sigma: f64,
    /// Noise standard deviation at the receivers; `sigma` when unset.
    pub eval_sigma: Option<f64>,
    /// Law that generates the channel estimation errors.
    pub error_model: UncertaintyModel,
    /// Error level assumed by the stochastic design.
    pub xi: f64,
    /// Ball radius assumed by the worst-case design.
    pub delta: f64,
    pub epsilon: f64,
    pub blocks: usize,
    pub slots: usize,
    pub noise_draws: usize,
    pub seed: u64,
    pub precoders: Vec<PrecoderKind>,
    pub averaging: Averaging,
    pub stochastic_form: StochasticForm,
    pub tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let antennas = 4;
        let xi = 0.05;
        Self {
            antennas,
            users: 4,
            order: 8,
            gamma_db: (0..=10).map(|i| 2.0 * i as f64).collect(),
            sigma: 1.0,
            eval_sigma: None,
            error_model: UncertaintyModel::Stochastic { xi },
            xi,
            delta: matched_delta(antennas, xi),
            epsilon: 0.01,
            blocks: 200,
            slots: 50,
            noise_draws: 100,
            seed: 1,
            precoders: PrecoderKind::ALL.to_vec(),
            averaging: Averaging::Common,
            stochastic_form: StochasticForm::PerRow,
            tol: DEFAULT_TOL,
        }
    }
}

/// Radius matching a Gaussian error level: `δ = √(2N)·ξ`.
pub fn matched_delta(antennas: usize, xi: f64) -> f64 {
    (2.0 * antennas as f64).sqrt() * xi
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 || self.users == 0 {
            return Err(invalid("need at least one antenna and one user"));
        }
        if self.order < 2 {
            return Err(invalid(format!("PSK order must be at least 2, got {}", self.order)));
        }
        if self.gamma_db.is_empty() || self.gamma_db.iter().any(|g| !g.is_finite()) {
            return Err(invalid("SINR grid must be a nonempty list of finite dB values"));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(invalid(format!("sigma must be positive, got {}", self.sigma)));
        }
        if let Some(s) = self.eval_sigma {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(invalid(format!("evaluation sigma must be nonnegative, got {s}")));
            }
        }
        self.error_model.validate()?;
        if !(self.xi >= 0.0) || !self.xi.is_finite() {
            return Err(invalid(format!("xi must be nonnegative, got {}", self.xi)));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(invalid(format!("delta must be nonnegative, got {}", self.delta)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.blocks == 0 || self.slots == 0 || self.noise_draws == 0 {
            return Err(invalid("blocks, slots and noise draws must all be at least 1"));
        }
        if self.precoders.is_empty() {
            return Err(invalid("no precoders selected"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid(format!("solver tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    fn receiver_sigma(&self) -> f64 {
        self.eval_sigma.unwrap_or(self.sigma)
    }

    fn design_model(&self, kind: PrecoderKind) -> UncertaintyModel {
        match kind {
            PrecoderKind::Perfect | PrecoderKind::NonRobust => UncertaintyModel::None,
            PrecoderKind::WorstCase => UncertaintyModel::Spherical { delta: self.delta },
            PrecoderKind::Stochastic => UncertaintyModel::Stochastic { xi: self.xi },
        }
    }
}

/// Everything drawn for one fading block.
#[derive(Debug, Clone)]
pub struct BlockState {
    pub realization: ChannelRealization,
    /// `symbols[slot][user]`.
    pub symbols: Vec<Vec<SymbolIndex>>,
    /// `noise[slot][draw * K + user]`, unit-variance circular Gaussian.
    pub noise: Vec<Vec<Complex64>>,
}

/// Per-block generator: stream `block` of the ChaCha8 cipher keyed by `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// `CN(0, 1)`: real and imaginary parts each `N(0, 1/2)`.
fn unit_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn draw_block(cfg: &SimConfig, constellation: &Constellation, block: u64) -> Result<BlockState> {
    let mut rng = block_rng(cfg.seed, block);
    let realization = realize(cfg.antennas, cfg.users, &cfg.error_model, &mut rng)?;
    let k = cfg.users;
    let mut symbols = Vec::with_capacity(cfg.slots);
    let mut noise = Vec::with_capacity(cfg.slots);
    for _ in 0..cfg.slots {
        symbols.push(
            (0..k)
                .map(|_| constellation.symbol(rng.random_range(0..constellation.order())))
                .collect::<Result<Vec<_>>>()?,
        );
        noise.push((0..cfg.noise_draws * k).map(|_| unit_complex_normal(&mut rng)).collect());
    }
    Ok(BlockState { realization, symbols, noise })
}

/// Noise-free samples `H_k ũ` read back as complex numbers.
pub fn noiseless(lifts: &[RealLift], u: &[f64]) -> Vec<Complex64> {
    let u = DVector::from_column_slice(u);
    lifts
        .iter()
        .map(|h| {
            let y = h * &u;
            Complex64::new(y[0], y[1])
        })
        .collect()
}

/// `r_k = H_k ũ + z_k` with `z_k ∼ CN(0, σ²)` independent across users.
pub fn receive<R: Rng + ?Sized>(lifts: &[RealLift], u: &[f64], sigma: f64, rng: &mut R) -> Result<Vec<Complex64>> {
    if !(sigma >= 0.0) {
        return Err(invalid(format!("sigma must be nonnegative, got {sigma}")));
    }
    Ok(noiseless(lifts, u).into_iter().map(|y| y + unit_complex_normal(rng) * sigma).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotOutcome {
    /// `‖ũ‖²`; zero when infeasible.
    pub power: f64,
    pub feasible: bool,
    /// Symbol errors per user over the slot's noise draws.
    pub errors: Vec<usize>,
    /// `‖H_k ũ‖²` per user on the true channels.
    pub gains: Vec<f64>,
}

impl SlotOutcome {
    fn infeasible(users: usize) -> Self {
        Self { power: 0.0, feasible: false, errors: vec![0; users], gains: vec![0.0; users] }
    }

    pub fn ser(&self, user: usize, noise_draws: usize) -> f64 {
        self.errors[user] as f64 / noise_draws as f64
    }
}

/// Solves the precoder problem for one slot at linear threshold `gamma`.
pub fn design(
    cfg: &SimConfig,
    block: &BlockState,
    descriptors: &[CirDescriptor],
    kind: PrecoderKind,
    gamma: f64,
) -> Result<SocpSolution> {
    let lifts = match kind {
        PrecoderKind::Perfect => &block.realization.true_lifts,
        _ => &block.realization.estimate_lifts,
    };
    let psis = descriptors.iter().map(|d| psi(d, cfg.sigma, gamma)).collect::<Result<Vec<_>>>()?;
    let inputs = ScenarioInputs::new(lifts.clone(), descriptors.to_vec(), psis, cfg.design_model(kind), cfg.epsilon)?;
    let problem = match kind {
        PrecoderKind::Stochastic => build_stochastic_with(&inputs, cfg.stochastic_form)?,
        other => build(other, &inputs)?,
    };
    solve(&problem, cfg.tol)
}

/// Designs for slot `slot` and evaluates on the true channels.
pub fn run_slot(
    cfg: &SimConfig,
    constellation: &Constellation,
    block: &BlockState,
    slot: usize,
    kind: PrecoderKind,
    gamma_db: f64,
) -> Result<SlotOutcome> {
    let symbols = &block.symbols[slot];
    let descriptors: Vec<_> = symbols.iter().map(|&m| dpcir_for(constellation, m)).collect();
    let solution = design(cfg, block, &descriptors, kind, db_to_linear(gamma_db))?;
    Ok(evaluate(cfg, constellation, block, slot, &solution))
}

/// Counts detection errors of a designed slot over its noise draws.
pub fn evaluate(
    cfg: &SimConfig,
    constellation: &Constellation,
    block: &BlockState,
    slot: usize,
    solution: &SocpSolution,
) -> SlotOutcome {
    let k = cfg.users;
    if !solution.is_optimal() {
        return SlotOutcome::infeasible(k);
    }
    let clean = noiseless(&block.realization.true_lifts, &solution.u);
    let sigma = cfg.receiver_sigma();
    let symbols = &block.symbols[slot];
    let mut errors = vec![0usize; k];
    for draw in block.noise[slot].chunks_exact(k) {
        for user in 0..k {
            let r = clean[user] + draw[user] * sigma;
            if constellation.detect_ml(r) != symbols[user] {
                errors[user] += 1;
            }
        }
    }
    SlotOutcome {
        power: crate::socp::dot(&solution.u, &solution.u),
        feasible: true,
        errors,
        gains: clean.iter().map(|y| y.norm_sqr()).collect(),
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `η = (1/K)·Σ_k (1 − SER_k)·log₂(1 + ‖H_k ũ‖²) / ‖ũ‖²` per slot, averaged
/// over feasible slots with nonzero power.
pub fn power_efficiency(slots: &[&SlotOutcome], noise_draws: usize) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in slots.iter().filter(|s| s.feasible && s.power > 0.0) {
        let k = s.gains.len();
        let throughput: f64 =
            (0..k).map(|user| (1.0 - s.ser(user, noise_draws)) * (1.0 + s.gains[user]).log2()).sum::<f64>() / k as f64;
        sum += throughput / s.power;
        count += 1;
    }
    if count == 0 {
        return Err(SlpError::UndefinedMetric("no feasible slot with nonzero power".into()));
    }
    Ok(sum / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub precoder: PrecoderKind,
    pub gamma_db: f64,
    /// `10·log10` of the mean linear power; NaN when no slot was averaged.
    pub avg_power_dbw: f64,
    pub ser_avg: f64,
    pub ser_user: Vec<f64>,
    /// NaN when undefined.
    pub eta: f64,
    /// Fraction of slots this precoder failed to solve.
    pub infeasible_rate: f64,
    /// Slots entering the averages.
    pub averaged_slots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: SimConfig,
    /// Ordered by precoder (as configured), then by the SINR grid.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, precoder: PrecoderKind, gamma_db: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.precoder == precoder && r.gamma_db == gamma_db)
    }
}

/// `outcomes[gamma][precoder][slot]` for one block.
type BlockOutcomes = Vec<Vec<Vec<SlotOutcome>>>;

fn run_block(cfg: &SimConfig, constellation: &Constellation, block: u64) -> Result<BlockOutcomes> {
    let state = draw_block(cfg, constellation, block)?;
    let mut out = vec![vec![Vec::with_capacity(cfg.slots); cfg.precoders.len()]; cfg.gamma_db.len()];
    for slot in 0..cfg.slots {
        let descriptors: Vec<_> = state.symbols[slot].iter().map(|&m| dpcir_for(constellation, m)).collect();
        for (gi, &g) in cfg.gamma_db.iter().enumerate() {
            for (pi, &kind) in cfg.precoders.iter().enumerate() {
                let solution = design(cfg, &state, &descriptors, kind, db_to_linear(g))?;
                out[gi][pi].push(evaluate(cfg, constellation, &state, slot, &solution));
            }
        }
    }
    Ok(out)
}

/// Runs every block (in parallel) and aggregates per `(precoder, γ)`.
pub fn run_sweep(cfg: &SimConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let constellation = Constellation::mpsk(cfg.order)?;
    let blocks: Vec<BlockOutcomes> =
        (0..cfg.blocks as u64).into_par_iter().map(|b| run_block(cfg, &constellation, b)).collect::<Result<_>>()?;
    Ok(aggregate(cfg, &blocks))
}

fn aggregate(cfg: &SimConfig, blocks: &[BlockOutcomes]) -> SweepResult {
    let k = cfg.users;
    let total = (cfg.blocks * cfg.slots) as f64;
    let mut rows = Vec::with_capacity(cfg.precoders.len() * cfg.gamma_db.len());
    for (pi, &kind) in cfg.precoders.iter().enumerate() {
        for (gi, &g) in cfg.gamma_db.iter().enumerate() {
            let mut used: Vec<&SlotOutcome> = Vec::new();
            let mut infeasible = 0usize;
            for block in blocks {
                let per_precoder = &block[gi];
                for slot in 0..cfg.slots {
                    let own = &per_precoder[pi][slot];
                    if !own.feasible {
                        infeasible += 1;
                    }
                    let include = match cfg.averaging {
                        Averaging::PerPrecoder => own.feasible,
                        Averaging::Common => per_precoder.iter().all(|p| p[slot].feasible),
                    };
                    if include {
                        used.push(own);
                    }
                }
            }
            let n = used.len();
            let (avg_power_dbw, ser_user) = if n == 0 {
                (f64::NAN, vec![f64::NAN; k])
            } else {
                let mean_power = used.iter().map(|s| s.power).sum::<f64>() / n as f64;
                let ser_user = (0..k)
                    .map(|user| used.iter().map(|s| s.ser(user, cfg.noise_draws)).sum::<f64>() / n as f64)
                    .collect();
                (10.0 * mean_power.log10(), ser_user)
            };
            let ser_avg = ser_user.iter().sum::<f64>() / k as f64;
            rows.push(SweepRow {
                precoder: kind,
                gamma_db: g,
                avg_power_dbw,
                ser_avg,
                ser_user,
                eta: power_efficiency(&used, cfg.noise_draws).unwrap_or(f64::NAN),
                infeasible_rate: infeasible as f64 / total,
                averaged_slots: n,
            });
        }
    }
    SweepResult { config: cfg.clone(), rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SimConfig {
        SimConfig { gamma_db: vec![4.0, 10.0], blocks: 3, slots: 4, noise_draws: 20, seed, ..SimConfig::default() }
    }

    fn outcome(power: f64, errors: Vec<usize>, gains: Vec<f64>) -> SlotOutcome {
        SlotOutcome { power, feasible: true, errors, gains }
    }

    #[test]
    fn efficiency_examples() {
        let s = outcome(2.0, vec![0], vec![3.0]);
        assert!((power_efficiency(&[&s], 10).unwrap() - 1.0).abs() < 1e-15);

        let all_wrong = outcome(2.0, vec![10, 10], vec![3.0, 1.0]);
        assert_eq!(power_efficiency(&[&all_wrong], 10).unwrap(), 0.0);

        let base = outcome(1.0, vec![2, 5], vec![3.0, 7.0]);
        let doubled = SlotOutcome { power: 2.0, ..base.clone() };
        let a = power_efficiency(&[&base], 10).unwrap();
        let b = power_efficiency(&[&doubled], 10).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15);
    }

    #[test]
    fn efficiency_without_feasible_slots_is_undefined() {
        let s = SlotOutcome::infeasible(2);
        assert!(matches!(power_efficiency(&[&s], 10), Err(SlpError::UndefinedMetric(_))));
        assert!(matches!(power_efficiency(&[], 10), Err(SlpError::UndefinedMetric(_))));
    }

    #[test]
    fn receive_without_noise_is_noiseless() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = crate::channel::sample_rayleigh(3, 2, &mut rng);
        let lifts: Vec<_> = h.iter().map(|x| x.lift()).collect();
        let u = vec![0.3, -0.1, 0.2, 0.5, -0.7, 0.05];
        assert_eq!(receive(&lifts, &u, 0.0, &mut rng).unwrap(), noiseless(&lifts, &u));
        assert!(receive(&lifts, &u, -1.0, &mut rng).is_err());
    }

    #[test]
    fn receive_noise_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lifts = vec![RealLift::zeros(2), RealLift::zeros(2)];
        let n = 1_000_000;
        let (mut p0, mut p1, mut cross) = (0.0, 0.0, Complex64::new(0.0, 0.0));
        for _ in 0..n {
            let r = receive(&lifts, &[0.0, 0.0], 1.0, &mut rng).unwrap();
            p0 += r[0].norm_sqr();
            p1 += r[1].norm_sqr();
            cross += r[0] * r[1].conj();
        }
        let n = n as f64;
        assert!((p0 / n - 1.0).abs() < 0.01 && (p1 / n - 1.0).abs() < 0.01);
        assert!((cross / n).norm() < 0.005);
    }

    #[test]
    fn dbw_matches_hand_computation() {
        let cfg = SimConfig {
            users: 1,
            gamma_db: vec![0.0],
            precoders: vec![PrecoderKind::NonRobust],
            blocks: 1,
            slots: 2,
            noise_draws: 4,
            ..SimConfig::default()
        };
        let block = vec![vec![vec![outcome(1.0, vec![0], vec![1.0]), outcome(3.0, vec![2], vec![1.0])]]];
        let result = aggregate(&cfg, &[block]);
        let row = &result.rows[0];
        assert!((row.avg_power_dbw - 10.0 * 2f64.log10()).abs() < 1e-12);
        assert!((row.ser_avg - 0.25).abs() < 1e-15);
        assert_eq!(row.infeasible_rate, 0.0);
    }

    #[test]
    fn common_averaging_drops_slots_infeasible_elsewhere() {
        let cfg = SimConfig {
            users: 1,
            gamma_db: vec![0.0],
            precoders: vec![PrecoderKind::NonRobust, PrecoderKind::WorstCase],
            blocks: 1,
            slots: 2,
            noise_draws: 1,
            ..SimConfig::default()
        };
        let nr = vec![outcome(1.0, vec![0], vec![1.0]), outcome(9.0, vec![0], vec![1.0])];
        let wc = vec![outcome(2.0, vec![0], vec![1.0]), SlotOutcome::infeasible(1)];
        let block = vec![vec![nr, wc]];
        let common = aggregate(&cfg, std::slice::from_ref(&block));
        assert!((common.rows[0].avg_power_dbw - 0.0).abs() < 1e-12);
        assert_eq!(common.rows[1].infeasible_rate, 0.5);
        let own = aggregate(&SimConfig { averaging: Averaging::PerPrecoder, ..cfg }, &[block]);
        assert!((own.rows[0].avg_power_dbw - 10.0 * 5f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = run_sweep(&small(7)).unwrap();
        let b = run_sweep(&small(7)).unwrap();
        assert_eq!(format!("{:?}", a.rows), format!("{:?}", b.rows));
        let c = run_sweep(&small(8)).unwrap();
        assert_ne!(format!("{:?}", a.rows), format!("{:?}", c.rows));
    }

    #[test]
    fn single_slot_sweep_equals_slot_outcome() {
        let cfg = SimConfig {
            gamma_db: vec![6.0],
            blocks: 1,
            slots: 1,
            precoders: vec![PrecoderKind::NonRobust],
            error_model: UncertaintyModel::None,
            ..small(3)
        };
        let result = run_sweep(&cfg).unwrap();
        let c = Constellation::mpsk(cfg.order).unwrap();
        let state = draw_block(&cfg, &c, 0).unwrap();
        let slot = run_slot(&cfg, &c, &state, 0, PrecoderKind::NonRobust, 6.0).unwrap();
        let row = &result.rows[0];
        assert!(slot.feasible);
        assert_eq!(row.avg_power_dbw, 10.0 * slot.power.log10());
        for user in 0..cfg.users {
            assert_eq!(row.ser_user[user], slot.ser(user, cfg.noise_draws));
        }
        assert_eq!(row.eta, power_efficiency(&[&slot], cfg.noise_draws).unwrap());
    }

    #[test]
    fn nonrobust_without_errors_matches_perfect() {
        let cfg = SimConfig { error_model: UncertaintyModel::None, ..small(4) };
        let result = run_sweep(&cfg).unwrap();
        for &g in &cfg.gamma_db {
            let p = result.row(PrecoderKind::Perfect, g).unwrap();
            let n = result.row(PrecoderKind::NonRobust, g).unwrap();
            assert_eq!(p.avg_power_dbw, n.avg_power_dbw);
            assert_eq!(p.ser_user, n.ser_user);
        }
    }

    #[test]
    fn perfect_precoder_is_error_free_without_noise() {
        let cfg = SimConfig {
            eval_sigma: Some(0.0),
            error_model: UncertaintyModel::None,
            precoders: vec![PrecoderKind::Perfect],
            ..small(5)
        };
        let result = run_sweep(&cfg).unwrap();
        assert!(result.rows.iter().all(|r| r.ser_avg == 0.0 && r.infeasible_rate == 0.0));
    }

    #[test]
    fn worst_case_is_error_free_under_ball_errors() {
        let cfg = SimConfig {
            eval_sigma: Some(0.0),
            error_model: UncertaintyModel::Spherical { delta: matched_delta(4, 0.05) },
            precoders: vec![PrecoderKind::WorstCase],
            averaging: Averaging::PerPrecoder,
            ..small(6)
        };
        let result = run_sweep(&cfg).unwrap();
        for r in &result.rows {
            assert!(r.averaged_slots == 0 || r.ser_avg == 0.0, "{r:?}");
        }
    }

    #[test]
    fn power_grows_with_gamma() {
        let result = run_sweep(&small(9)).unwrap();
        for &kind in &PrecoderKind::ALL {
            let a = result.row(kind, 4.0).unwrap().avg_power_dbw;
            let b = result.row(kind, 10.0).unwrap().avg_power_dbw;
            assert!(b >= a, "{kind}: {a} -> {b}");
        }
    }

    #[test]
    fn rejects_bad_config() {
        for cfg in [
            SimConfig { blocks: 0, ..SimConfig::default() },
            SimConfig { noise_draws: 0, ..SimConfig::default() },
            SimConfig { gamma_db: vec![], ..SimConfig::default() },
            SimConfig { epsilon: 1.0, ..SimConfig::default() },
            SimConfig { precoders: vec![], ..SimConfig::default() },
            SimConfig { eval_sigma: Some(-1.0), ..SimConfig::default() },
        ] {
            assert!(run_sweep(&cfg).is_err());
        }
    }
}
