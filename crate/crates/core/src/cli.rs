//! Command-line verbs: `generate`, `solve`, `verify`, `scan` and `batch`.
//!
//! Exit codes: 0 on success, 1 when a solve does not converge or a policy
//! fails verification, 2 on bad arguments or unreadable input.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::generate_random_game;
use crate::io;
use crate::solver::{
    scan_policy_space, solve, solve_from, verify_epsilon_equilibrium, worst_violation, InnerStep, SolveConfig,
    Status,
};

/// Odd constant mixed into per-game batch seeds.
pub const SEED_STRIDE: u64 = 0x9E37_79B9;

#[derive(Debug, Parser)]
#[command(name = "bundle-solve", version, about = "Equilibria of finite dynamic games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random game file
    Generate(GenerateArgs),
    /// Solve a game file
    Solve(SolveArgs),
    /// Check whether a policy is an ε-equilibrium
    Verify(VerifyArgs),
    /// Rank random policies by canonical-section norm
    Scan(ScanArgs),
    /// Generate and solve many random games
    Batch(BatchArgs),
}

#[derive(Debug, Args)]
pub struct ShapeArgs {
    #[arg(long, default_value_t = 2)]
    pub players: usize,
    #[arg(long, default_value_t = 1)]
    pub states: usize,
    #[arg(long, default_value_t = 2)]
    pub actions: usize,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InnerStepArg {
    Newton,
    Gradient,
}

/// Solver flags, one per [`SolveConfig`] field.
#[derive(Debug, Args, Clone, Default)]
pub struct ConfigArgs {
    /// Target canonical-section norm
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Logit step of the gradient inner step
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub max_inner: Option<usize>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub mu_prime_factor: Option<f64>,
    #[arg(long)]
    pub m_factor: Option<f64>,
    #[arg(long)]
    pub inner_tol_bias: Option<f64>,
    #[arg(long)]
    pub inner_tol_angle: Option<f64>,
    #[arg(long)]
    pub singular_rcond: Option<f64>,
    #[arg(long, value_enum)]
    pub inner_step: Option<InnerStepArg>,
}

impl ConfigArgs {
    pub fn to_config(&self, seed: u64) -> Result<SolveConfig> {
        let d = SolveConfig::default();
        let cfg = SolveConfig {
            mu_prime_factor: self.mu_prime_factor.unwrap_or(d.mu_prime_factor),
            m_factor: self.m_factor.unwrap_or(d.m_factor),
            eta: self.eta.unwrap_or(d.eta),
            step_size: self.step.unwrap_or(d.step_size),
            inner_tol_bias: self.inner_tol_bias.unwrap_or(d.inner_tol_bias),
            inner_tol_angle: self.inner_tol_angle.unwrap_or(d.inner_tol_angle),
            outer_tol_eps: self.eps.unwrap_or(d.outer_tol_eps),
            max_inner: self.max_inner.unwrap_or(d.max_inner),
            max_outer: self.max_outer.unwrap_or(d.max_outer),
            singular_rcond: self.singular_rcond.unwrap_or(d.singular_rcond),
            seed,
            inner_step: match self.inner_step {
                None => d.inner_step,
                Some(InnerStepArg::Newton) => InnerStep::Newton,
                Some(InnerStepArg::Gradient) => InnerStep::Gradient,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Starting policy file (uniform if omitted)
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// JSON-lines trace output
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub policy_out: Option<PathBuf>,
    /// Result file (stdout if omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long)]
    pub policy: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Worker threads (0 uses every core)
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Summary file (stdout if omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub seed: u64,
    pub status: Status,
    pub outer_steps: usize,
    pub inner_steps: usize,
    pub eps_achieved: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub n_games: usize,
    pub n_converged: usize,
    pub eps: f64,
    pub games: Vec<BatchRecord>,
}

/// Seed of game `index` in a batch: `base XOR (index · 0x9E3779B9)`.
pub fn batch_seed(base: u64, index: usize) -> u64 {
    base ^ (index as u64).wrapping_mul(SEED_STRIDE)
}

/// Writes a line to stdout; a closed pipe (`| head`) is not an error.
fn say(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit<T: Serialize>(value: &T, path: Option<&PathBuf>) -> Result<()> {
    match path {
        Some(p) => io::write_json(value, p),
        None => {
            say(&serde_json::to_string_pretty(value)?)
        }
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let s = &args.shape;
    let game = generate_random_game(s.players, s.states, s.actions, s.gamma, s.seed)?;
    io::save_game(&game, &args.output)?;
    say(&format!(
        "{}: {} players, {} states, {} actions, gamma {}",
        args.output.display(),
        s.players,
        s.states,
        s.actions,
        s.gamma
    ))?;
    Ok(0)
}

fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let game = io::load_game(&args.game)?;
    let cfg = args.config.to_config(args.seed)?;
    let (result, trace) = match &args.init {
        Some(path) => solve_from(&game, &cfg, &io::load_policy(path)?)?,
        None => solve(&game, &cfg)?,
    };
    if let Some(path) = &args.trace {
        io::save_trace(&trace, path)?;
    }
    if let Some(path) = &args.policy_out {
        io::save_policy(&result.policy, path)?;
    }
    emit(&io::result_file(&result), args.output.as_ref())?;
    Ok(if result.status == Status::Converged { 0 } else { 1 })
}

#[derive(Serialize)]
struct VerifyReport {
    epsilon_equilibrium: bool,
    eps: f64,
    max_violation: f64,
    state: usize,
    player: usize,
    action: usize,
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let game = io::load_game(&args.game)?;
    let policy = io::load_policy(&args.policy)?;
    let (ok, mu) = verify_epsilon_equilibrium(&game, &policy, args.eps)?;
    let ((state, player, action), max_violation) = worst_violation(&mu);
    let report = VerifyReport { epsilon_equilibrium: ok, eps: args.eps, max_violation, state, player, action };
    say(&serde_json::to_string_pretty(&report)?)?;
    Ok(if ok { 0 } else { 1 })
}

#[derive(Serialize)]
struct ScanEntry {
    rank: usize,
    canosec_norm: f64,
    probs: Vec<Vec<Vec<f64>>>,
}

fn cmd_scan(args: &ScanArgs) -> Result<i32> {
    let game = io::load_game(&args.game)?;
    let ranked = scan_policy_space(&game, args.samples, args.seed)?;
    let top: Vec<ScanEntry> = ranked
        .into_iter()
        .take(args.top)
        .enumerate()
        .map(|(rank, (policy, canosec_norm))| ScanEntry { rank, canosec_norm, probs: io::policy_file(&policy).probs })
        .collect();
    say(&serde_json::to_string_pretty(&top)?)?;
    Ok(0)
}

/// Generates and solves `count` games; results do not depend on `jobs`.
pub fn run_batch(args: &BatchArgs) -> Result<BatchSummary> {
    let s = &args.shape;
    let base = args.config.to_config(s.seed)?;
    // validate the shape once so workers cannot fail on arguments
    generate_random_game(s.players, s.states, s.actions, s.gamma, s.seed)?;
    let one = |index: usize| -> Result<BatchRecord> {
        let seed = batch_seed(s.seed, index);
        let game = generate_random_game(s.players, s.states, s.actions, s.gamma, seed)?;
        let cfg = SolveConfig { seed, ..base.clone() };
        let start = Instant::now();
        let (result, _) = solve(&game, &cfg)?;
        Ok(BatchRecord {
            seed,
            status: result.status,
            outer_steps: result.outer_steps_total,
            inner_steps: result.inner_steps_total,
            eps_achieved: result.eps_achieved,
            wall_seconds: start.elapsed().as_secs_f64(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start {} workers: {e}", args.jobs)))?;
    let games = pool.install(|| (0..args.count).into_par_iter().map(one).collect::<Result<Vec<_>>>())?;
    let n_converged = games.iter().filter(|g| g.status == Status::Converged).count();
    Ok(BatchSummary { n_games: args.count, n_converged, eps: base.outer_tol_eps, games })
}

fn cmd_batch(args: &BatchArgs) -> Result<i32> {
    let summary = run_batch(args)?;
    emit(&summary, args.output.as_ref())?;
    Ok(if summary.n_converged == summary.n_games { 0 } else { 1 })
}

/// Parses `args` (program name first), runs the verb and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Batch(a) => cmd_batch(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Installs the stderr logger, filtered by `BUNDLE_SOLVE_LOG` (default `error`).
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or("BUNDLE_SOLVE_LOG", "error");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}
