mod format;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use slp_core::channel::{realize, ComplexVector, UncertaintyModel};
use slp_core::constellation::Constellation;
use slp_core::dpcir::{dpcir_for, psi};
use slp_core::precoders::{
    build, build_stochastic_with, ci_violation_mc, PrecoderKind, ScenarioInputs, StochasticForm,
};
use slp_core::sim::{block_rng, db_to_linear, matched_delta, run_sweep, Averaging, SimConfig};
use slp_core::socp::{solve, verify, SocpProblem, SocpSolution, Verification};
use slp_core::validation::{self, ValidateOptions};
use slp_core::SlpError;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "slp", version, about = "Robust symbol-level precoding for the multiuser MISO downlink")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte-Carlo sweep over SINR thresholds; writes one CSV row per (precoder, threshold).
    Sweep(SweepArgs),
    /// Run the oracle self-checks; exits 2 if any fails.
    Validate(ValidateArgs),
    /// Design one slot and dump the problem, solution and residuals as JSON.
    Single(SingleArgs),
}

#[derive(Args, Debug, Clone)]
struct SystemArgs {
    /// Transmit antennas N.
    #[arg(long, default_value_t = 4)]
    antennas: usize,
    /// Users K.
    #[arg(long, default_value_t = 4)]
    users: usize,
    /// PSK order M (2, 4, 8, ...) or bpsk/qpsk/8psk.
    #[arg(long, default_value = "8", value_parser = parse_modulation)]
    modulation: usize,
    /// Gaussian error level: real and imaginary error parts ∼ N(0, xi²).
    #[arg(long, default_value_t = 0.05)]
    xi: f64,
    /// Worst-case ball radius; defaults to √(2N)·xi.
    #[arg(long)]
    delta: Option<f64>,
    /// Target CI violation probability of the stochastic design.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Law that draws the channel estimation errors.
    #[arg(long, value_enum, default_value_t = ErrorModel::Gaussian)]
    error_model: ErrorModel,
    /// Stochastic row construction.
    #[arg(long, value_enum, default_value_t = FormArg::PerRow)]
    stochastic_form: FormArg,
    /// Master seed (overrides SLP_SEED).
    #[arg(long, env = "SLP_SEED", default_value_t = 1)]
    seed: u64,
}

impl SystemArgs {
    fn delta(&self) -> f64 {
        self.delta.unwrap_or_else(|| matched_delta(self.antennas, self.xi))
    }

    fn error_law(&self) -> UncertaintyModel {
        match self.error_model {
            ErrorModel::Gaussian => UncertaintyModel::Stochastic { xi: self.xi },
            ErrorModel::Spherical => UncertaintyModel::Spherical { delta: self.delta() },
            ErrorModel::None => UncertaintyModel::None,
        }
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Comma-separated subset of perfect,nonrobust,worstcase,stochastic.
    #[arg(long, value_delimiter = ',', default_value = "perfect,nonrobust,worstcase,stochastic")]
    precoders: Vec<PrecoderKind>,
    /// SINR thresholds in dB: a list `0,5,10` or a range `min:step:max`.
    #[arg(long, default_value = "0:2:20", value_parser = parse_gammas)]
    gammas: Gammas,
    #[arg(long, default_value_t = 200)]
    blocks: usize,
    #[arg(long, default_value_t = 50)]
    slots: usize,
    /// Noise realizations per slot for the SER estimate.
    #[arg(long, default_value_t = 100)]
    noise_draws: usize,
    /// Receiver noise standard deviation, when it differs from the design value.
    #[arg(long)]
    eval_sigma: Option<f64>,
    /// Slots entering the averages.
    #[arg(long, value_enum, default_value_t = AveragingArg::Common)]
    averaging: AveragingArg,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
    /// Skip the console summary.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Reduced sample counts.
    #[arg(long)]
    quick: bool,
    #[arg(long, env = "SLP_SEED", default_value_t = 1)]
    seed: u64,
    /// Negative control: use the wrong sign of ρ(ε).
    #[arg(long, hide = true)]
    flip_rho_sign: bool,
}

#[derive(Args, Debug)]
struct SingleArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value = "nonrobust")]
    precoder: PrecoderKind,
    /// SINR threshold in dB.
    #[arg(long, default_value_t = 10.0)]
    gamma: f64,
    /// Symbol index per user, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    symbols: Vec<usize>,
    /// Use N = K = 1 with a unit channel and no estimation error.
    #[arg(long)]
    unit_channel: bool,
    /// Error draws for the CI violation estimate.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ErrorModel {
    Gaussian,
    Spherical,
    None,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FormArg {
    PerRow,
    Decorrelated,
}

impl From<FormArg> for StochasticForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::PerRow => StochasticForm::PerRow,
            FormArg::Decorrelated => StochasticForm::Decorrelated,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum AveragingArg {
    Common,
    PerPrecoder,
}

impl From<AveragingArg> for Averaging {
    fn from(a: AveragingArg) -> Self {
        match a {
            AveragingArg::Common => Averaging::Common,
            AveragingArg::PerPrecoder => Averaging::PerPrecoder,
        }
    }
}

#[derive(Debug, Clone)]
struct Gammas(Vec<f64>);

fn parse_gammas(s: &str) -> Result<Gammas, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}"));
    let values = match parts.as_slice() {
        [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        [lo, step, hi] => {
            let (lo, step, hi) = (num(lo)?, num(step)?, num(hi)?);
            if !(step > 0.0) || hi < lo {
                return Err("range needs step > 0 and max ≥ min".into());
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize;
            (0..=count).map(|i| lo + step * i as f64).collect()
        }
        _ => return Err("expected a comma list or min:step:max".into()),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err("thresholds must be finite".into());
    }
    Ok(Gammas(values))
}

fn parse_modulation(s: &str) -> Result<usize, String> {
    let order = match s.to_ascii_lowercase().as_str() {
        "bpsk" => 2,
        "qpsk" => 4,
        other => other.trim_end_matches("psk").parse::<usize>().map_err(|_| format!("unknown modulation '{s}'"))?,
    };
    if order < 2 {
        return Err(format!("PSK order must be at least 2, got {order}"));
    }
    Ok(order)
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Validation,
    Io(String),
}

impl From<SlpError> for Failure {
    fn from(e: SlpError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn io_failure(path: &std::path::Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Single(args) => cmd_single(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Validation) => ExitCode::from(EXIT_VALIDATION),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let s = &args.system;
    let cfg = SimConfig {
        antennas: s.antennas,
        users: s.users,
        order: s.modulation,
        gamma_db: args.gammas.0.clone(),
        sigma: s.sigma,
        eval_sigma: args.eval_sigma,
        error_model: s.error_law(),
        xi: s.xi,
        delta: s.delta(),
        epsilon: s.epsilon,
        blocks: args.blocks,
        slots: args.slots,
        noise_draws: args.noise_draws,
        seed: s.seed,
        precoders: args.precoders.clone(),
        averaging: args.averaging.into(),
        stochastic_form: s.stochastic_form.into(),
        ..SimConfig::default()
    };
    cfg.validate()?;
    // Open the output before the (long) sweep so a bad path fails fast.
    let file = File::create(&args.out).map_err(io_failure(&args.out))?;
    let result = run_sweep(&cfg)?;
    format::write_csv(BufWriter::new(file), &result)
        .map_err(|e| Failure::Io(format!("{}: {e}", args.out.display())))?;

    if !args.quiet {
        println!(
            "{:<11} {:>8} {:>12} {:>11} {:>11} {:>10}",
            "precoder", "gamma_db", "power_dbw", "ser_avg", "eta", "infeasible"
        );
        for r in &result.rows {
            println!(
                "{:<11} {:>8.2} {:>12.4} {:>11.4e} {:>11.4e} {:>10.4}",
                r.precoder.name(),
                r.gamma_db,
                r.avg_power_dbw,
                r.ser_avg,
                r.eta,
                r.infeasible_rate
            );
        }
        println!("wrote {}", args.out.display());
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    let report =
        validation::run(&ValidateOptions { quick: args.quick, seed: args.seed, flip_rho_sign: args.flip_rho_sign });
    for c in &report.checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for note in &report.notes {
        println!("[INFO] {note}");
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

#[derive(Serialize)]
struct SingleDump {
    precoder: PrecoderKind,
    gamma_db: f64,
    symbols: Vec<usize>,
    error_model: UncertaintyModel,
    problem: SocpProblem,
    solution: SocpSolution,
    power: f64,
    verification: Verification,
    /// Per-user Monte-Carlo CI violation around the estimates.
    ci_violation: Vec<f64>,
    ci_samples: usize,
}

fn cmd_single(args: SingleArgs) -> Result<(), Failure> {
    let s = &args.system;
    let (n, k) = if args.unit_channel { (1, 1) } else { (s.antennas, s.users) };
    if args.symbols.len() != k {
        return Err(Failure::Usage(format!("expected {k} symbols, got {}", args.symbols.len())));
    }
    if args.samples == 0 {
        return Err(Failure::Usage("samples must be at least 1".into()));
    }
    let constellation = Constellation::mpsk(s.modulation)?;
    let descriptors = args
        .symbols
        .iter()
        .map(|&m| Ok(dpcir_for(&constellation, constellation.symbol(m)?)))
        .collect::<Result<Vec<_>, SlpError>>()?;
    let gamma = db_to_linear(args.gamma);
    let psis = descriptors.iter().map(|d| psi(d, s.sigma, gamma)).collect::<Result<Vec<_>, _>>()?;

    let law = s.error_law();
    let mut rng = block_rng(s.seed, 0);
    let (truth, estimates) = if args.unit_channel {
        let lift = ComplexVector(vec![Complex64::new(1.0, 0.0)]).lift();
        (vec![lift.clone()], vec![lift])
    } else {
        let real = realize(n, k, &law, &mut rng)?;
        (real.true_lifts, real.estimate_lifts)
    };
    let design_model = match args.precoder {
        PrecoderKind::Perfect | PrecoderKind::NonRobust => UncertaintyModel::None,
        PrecoderKind::WorstCase => UncertaintyModel::Spherical { delta: s.delta() },
        PrecoderKind::Stochastic => UncertaintyModel::Stochastic { xi: s.xi },
    };
    let lifts = if args.precoder == PrecoderKind::Perfect { truth } else { estimates.clone() };
    let inputs = ScenarioInputs::new(lifts, descriptors.clone(), psis.clone(), design_model, s.epsilon)?;
    let problem = match args.precoder {
        PrecoderKind::Stochastic => build_stochastic_with(&inputs, s.stochastic_form.into())?,
        other => build(other, &inputs)?,
    };
    let solution = solve(&problem, slp_core::socp::DEFAULT_TOL)?;
    let verification = verify(&problem, &solution.u);
    let ci_violation = (0..k)
        .map(|user| {
            ci_violation_mc(
                &descriptors[user],
                &psis[user],
                &estimates[user],
                &solution.u,
                &law,
                args.samples,
                &mut rng,
            )
        })
        .collect();
    let dump = SingleDump {
        precoder: args.precoder,
        gamma_db: args.gamma,
        symbols: args.symbols.clone(),
        error_model: law,
        power: solution.u.iter().map(|x| x * x).sum(),
        problem,
        solution,
        verification,
        ci_violation,
        ci_samples: args.samples,
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, &dump)
        .map_err(io::Error::from)
        .and_then(|_| writeln!(out))
        .map_err(|e| Failure::Io(format!("stdout: {e}")))
}
