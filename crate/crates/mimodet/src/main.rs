//! Command-line front end: run sweeps, exactness verification, or a single
//! instrumented detection.

use clap::{Args, Parser, Subcommand};
use mimodet::channel::{draw_channel_retrying, draw_noise, noise_variance, transmit};
use mimodet::config::{ConfigBuilder, ConfigError};
use mimodet::constellation::{draw_uniform, make_qam};
use mimodet::detectors::{detect, DetectionProblem};
use mimodet::harness::run_sweep;
use mimodet::linalg::{rotate_received, OpCounters};
use mimodet::report::{emit_csv, emit_csv_file};
use mimodet::seeding::{stream_rng, Stream};
use mimodet::verify::{default_scenarios, run_scenario};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_CONFIG_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "mimodet",
    about = "Tree-search MIMO detection: SER and complexity measurement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full SNR sweep and emit per-detector CSV statistics.
    Sweep(SweepArgs),
    /// Check the exact-mode detectors against direct enumeration.
    Verify(VerifyArgs),
    /// Run one detection instance and print estimates and counters.
    Single(SingleArgs),
}

/// Flags mirror the algorithm parameters: --M (QRD-MLD breadth), --X
/// (threshold factor), --L (Dijkstra list bounds).
#[derive(Args, Clone)]
struct Overrides {
    /// Transmit antennas.
    #[arg(short = 't', long)]
    t: Option<usize>,
    /// Receive antennas.
    #[arg(short = 'r', long)]
    r: Option<usize>,
    /// QAM order (4, 16 or 64).
    #[arg(long)]
    order: Option<usize>,
    /// SNR grid in dB, comma separated.
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    /// Signals per SNR point.
    #[arg(long)]
    signals: Option<usize>,
    /// Fading block length in signals.
    #[arg(long)]
    fading_block: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = automatic).
    #[arg(long)]
    workers: Option<usize>,
    /// QRD-MLD breadth M.
    #[arg(short = 'M', long = "M")]
    m: Option<usize>,
    /// Improved-QRD-MLD threshold factor X.
    #[arg(short = 'X', long = "X")]
    x: Option<f64>,
    /// Dijkstra list bounds L, comma separated (one detector per value).
    #[arg(short = 'L', long = "L", value_delimiter = ',')]
    l: Option<Vec<usize>>,
    /// Number of outputs per detection (N-best).
    #[arg(short = 'N', long = "N")]
    n: Option<usize>,
    /// Detectors to run: ml, qrd-mld, qrd-mld-improved, dijkstra,
    /// dijkstra-unbounded.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ConfigBuilder) {
        if let Some(v) = self.t {
            cfg.t = v;
        }
        if let Some(v) = self.r {
            cfg.r = v;
        }
        if let Some(v) = self.order {
            cfg.order = v;
        }
        if let Some(v) = &self.snr {
            cfg.snr = v.clone();
        }
        if let Some(v) = self.signals {
            cfg.signals = v;
        }
        if let Some(v) = self.fading_block {
            cfg.fading_block = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.x {
            cfg.x = v;
        }
        if let Some(v) = &self.l {
            cfg.l = v.clone();
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = &self.algorithms {
            cfg.algorithms = v.clone();
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Config file in key=value format; flags override file values.
    #[arg(short = 'c', long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted).
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instances per scenario.
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    /// Seed for the verification draws.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Fault injection: offset the detector constellation so mismatches must
    /// be reported (negative control for the verifier itself).
    #[arg(long, hide = true)]
    corrupt: bool,
}

#[derive(Args)]
struct SingleArgs {
    #[command(flatten)]
    overrides: Overrides,
}

fn load_builder(config: &Option<PathBuf>, overrides: &Overrides) -> Result<ConfigBuilder, String> {
    let mut builder = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            ConfigBuilder::parse(&text).map_err(|e| e.to_string())?
        }
        None => ConfigBuilder::default(),
    };
    overrides.apply(&mut builder);
    Ok(builder)
}

fn cmd_sweep(args: &SweepArgs) -> ExitCode {
    let builder = match load_builder(&args.config, &args.overrides) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };
    let cfg = match builder.build() {
        Ok(c) => c,
        Err(e @ (ConfigError::RangeError(_) | ConfigError::ParseError { .. })) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };
    let result = match run_sweep(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("sweep failed: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };
    match &args.output {
        Some(path) => {
            if let Err(e) = emit_csv_file(&result, path) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG_ERROR);
            }
            eprintln!("wrote {}", path.display());
        }
        None => {
            if let Err(e) = emit_csv(&result, std::io::stdout().lock()) {
                eprintln!("cannot write CSV: {e}");
                return ExitCode::from(EXIT_CONFIG_ERROR);
            }
        }
    }
    ExitCode::SUCCESS
}

fn cmd_verify(args: &VerifyArgs) -> ExitCode {
    let mut all_ok = true;
    for sc in default_scenarios(args.instances) {
        let out = run_scenario(&sc, args.seed, args.corrupt);
        let status = if out.passed() { "ok" } else { "FAIL" };
        println!(
            "{}: {}/{} exact [{}]",
            out.scenario, out.exact, out.instances, status
        );
        all_ok &= out.passed();
    }
    if all_ok {
        println!("verification passed");
        ExitCode::SUCCESS
    } else {
        println!("verification FAILED");
        ExitCode::from(EXIT_VERIFY_FAILED)
    }
}

fn cmd_single(args: &SingleArgs) -> ExitCode {
    let mut builder = ConfigBuilder::default();
    builder.signals = 1;
    args.overrides.apply(&mut builder);
    let cfg = match builder.build() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };
    let cons = match make_qam(cfg.qam_order) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };
    let snr_db = cfg.snr_grid.first().copied().unwrap_or(20.0);
    let phi2 = noise_variance(snr_db, cfg.t, cons.energy());
    let mut rng = stream_rng(cfg.seed, Stream::Aux, 0, 0);
    let ch = match draw_channel_retrying(&mut rng, cfg.t, cfg.r) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("channel draw failed: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };
    let x = draw_uniform(&cons, &mut rng, cfg.t);
    let z = draw_noise(&mut rng, cfg.r, phi2).expect("phi2 > 0");
    let y = transmit(&ch, &x, &z).expect("consistent dimensions");

    println!("transmitted: {:?}", x.data());
    for spec in &cfg.detectors {
        let mut dcfg = spec.config.clone();
        dcfg.noise_variance = phi2;
        let mut ctx = OpCounters::new();
        let xi = rotate_received(&ch.q, &y, &mut ctx).expect("consistent dimensions");
        let problem = DetectionProblem {
            r_mat: &ch.r,
            xi,
            constellation: &cons,
            t: cfg.t,
        };
        match detect(&problem, &dcfg, &mut ctx) {
            Ok(res) => {
                println!("{}:", spec.label);
                for (est, m) in res.estimates.iter().zip(&res.metrics) {
                    println!("  estimate {:?} metric {m}", est.data());
                }
                println!(
                    "  counters: muldiv={} comparisons={} nodes={}",
                    ctx.complex_mul_div, ctx.real_comparisons, ctx.detection_nodes
                );
            }
            Err(e) => println!("{}: error: {e}", spec.label),
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Single(args) => cmd_single(args),
    }
}
