//! `bellkit` command-line front end.
//!
//! Exit codes: 0 success / no violation, 1 I/O or input error, 2 invalid
//! arguments or enumeration cap, 3 CHSH violation found by `analyze`,
//! 4 counterexample found by `oracle`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellkit_core::oracle::{verify_necessary_conditions_with, DEFAULT_CAP};
use bellkit_core::simulate::TrialStream;
use bellkit_core::{
    analyze, chsh_statistic, simulate_tally, tally_from_reader, AnalyzeOptions, Metadata, Model,
    SettingScheme, SimulationConfig, TallyTable, ThreeSettingTally, TrialFormat,
};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_COUNTEREXAMPLE: u8 = 4;

#[derive(Parser)]
#[command(name = "bellkit", version, about = "CHSH Bell-test simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate trials from a quantum or hidden-variable model and write the tally.
    Simulate(SimulateArgs),
    /// Compute CHSH statistics, no-signalling deltas and bounds for a tally or trial file.
    Analyze(AnalyzeArgs),
    /// Exhaustively check the necessary conditions on all uniform tallies of one size.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON simulation config; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["quantum", "lhv"], required_unless_present = "config")]
    model: Option<String>,
    /// θa0,θa1,θb0,θb1 in radians.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "config")]
    angles: Option<String>,
    #[arg(long, required_unless_present = "config")]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["uniform", "round-robin"])]
    settings: Option<String>,
    /// Negate station 2 outcomes (anti-correlated convention).
    #[arg(long)]
    flip_station2: bool,
    /// Tally JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Also write every trial to this path.
    #[arg(long)]
    emit_trials: Option<PathBuf>,
    #[arg(long, default_value = "jsonl", value_parser = ["jsonl", "csv"])]
    trial_format: String,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["tally", "trials"])))]
struct AnalyzeArgs {
    #[arg(long)]
    tally: Option<PathBuf>,
    #[arg(long)]
    trials: Option<PathBuf>,
    /// Trial file format; inferred from the extension when absent.
    #[arg(long, value_parser = ["jsonl", "csv"])]
    format: Option<String>,
    /// Skip the first line of a trial file.
    #[arg(long)]
    header: bool,
    /// Requested no-signalling accuracy.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Requested violation magnitude Δ for the bounds.
    #[arg(long)]
    delta: Option<f64>,
    /// Three-setting tally JSON for Bell's original inequality.
    #[arg(long)]
    bell1964: Option<PathBuf>,
    /// Seed that produced the input, recorded in the report metadata.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    n_per_setting: u64,
    /// Maximum number of tallies to enumerate.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u128,
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> Failure {
    Failure { code, msg: msg.to_string() }
}

type CmdResult = Result<u8, Failure>;

/// Writes a report to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(fail(EXIT_IO, format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn threads() -> usize {
    std::env::var("BELLKIT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn parse_angles(s: &str) -> Result<[f64; 4], Failure> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| fail(EXIT_USAGE, format!("--angles: {e}")))?;
    parts
        .try_into()
        .map_err(|_| fail(EXIT_USAGE, "--angles needs exactly four comma-separated radians"))
}

fn simulation_config(args: &SimulateArgs) -> Result<SimulationConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?
        }
        None => SimulationConfig::chsh_optimal(Model::Quantum, 1, 0),
    };
    let usage = |e: bellkit_core::Error| fail(EXIT_USAGE, e);
    if let Some(m) = &args.model {
        cfg.model = m.parse().map_err(usage)?;
    }
    if let Some(a) = &args.angles {
        [cfg.theta_a0, cfg.theta_a1, cfg.theta_b0, cfg.theta_b1] = parse_angles(a)?;
    }
    if let Some(n) = args.trials {
        cfg.trials = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(s) = &args.settings {
        cfg.setting_scheme = s.parse::<SettingScheme>().map_err(usage)?;
    }
    cfg.flip_station2 |= args.flip_station2;
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn write_trials(cfg: &SimulationConfig, path: &Path, format: TrialFormat) -> Result<TallyTable, Failure> {
    let io = |e: std::io::Error| fail(EXIT_IO, format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let mut tally = TallyTable::default();
    for t in TrialStream::new(cfg).map_err(|e| fail(EXIT_USAGE, e))? {
        tally.record(&t);
        writeln!(w, "{}", t.to_line(format)).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(tally)
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let cfg = simulation_config(&args)?;
    let tally = match &args.emit_trials {
        Some(path) => write_trials(&cfg, path, args.trial_format.parse().expect("validated by clap"))?,
        None => simulate_tally(&cfg, threads()).map_err(|e| fail(EXIT_USAGE, e))?,
    };
    fs::write(&args.out, tally.to_json() + "\n")
        .map_err(|e| fail(EXIT_IO, format!("{}: {e}", args.out.display())))?;

    let chsh = chsh_statistic(&tally).ok();
    let summary = serde_json::json!({
        "config": cfg,
        "tally": tally,
        "S": chsh.as_ref().map(|c| c.s),
        "violated": chsh.as_ref().map(|c| c.violated),
        "tool_version": bellkit_core::report::TOOL_VERSION,
    });
    emit(&serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    Ok(0)
}

fn read_input(path: &Path) -> Result<(Vec<u8>, String), Failure> {
    let bytes = fs::read(path).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    Ok((bytes, digest))
}

fn infer_format(path: &Path, explicit: Option<&str>) -> TrialFormat {
    let name = explicit.map(str::to_owned).unwrap_or_else(|| {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => "csv".into(),
            _ => "jsonl".into(),
        }
    });
    name.parse().unwrap_or(TrialFormat::Jsonl)
}

fn cmd_analyze(args: AnalyzeArgs) -> CmdResult {
    let input_err = |path: &Path, e: bellkit_core::Error| fail(EXIT_IO, format!("{}: {e}", path.display()));
    let (tally, digest) = match (&args.tally, &args.trials) {
        (Some(path), _) => {
            let (bytes, digest) = read_input(path)?;
            let text = String::from_utf8_lossy(&bytes);
            (TallyTable::from_json(&text).map_err(|e| input_err(path, e))?, digest)
        }
        (None, Some(path)) => {
            let (bytes, digest) = read_input(path)?;
            let format = infer_format(path, args.format.as_deref());
            let tally = tally_from_reader(&bytes[..], format, args.header).map_err(|e| input_err(path, e))?;
            (tally, digest)
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let bell1964 = match &args.bell1964 {
        Some(path) => {
            let (bytes, _) = read_input(path)?;
            let t: ThreeSettingTally = serde_json::from_slice(&bytes)
                .map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))?;
            Some(t)
        }
        None => None,
    };
    let opts = AnalyzeOptions { epsilon: args.epsilon, delta: args.delta, bell1964 };
    let report = analyze(&tally, &opts, Metadata::new(Some(digest), args.seed)).map_err(|e| fail(EXIT_IO, e))?;
    emit(&report.to_json_pretty())?;
    Ok(if report.violated() { EXIT_VIOLATION } else { 0 })
}

fn cmd_oracle(args: OracleArgs) -> CmdResult {
    let report = verify_necessary_conditions_with(args.n_per_setting, args.cap, threads())
        .map_err(|e| fail(EXIT_USAGE, e))?;
    emit(&serde_json::to_string_pretty(&report).expect("report serializes"))?;
    Ok(if report.holds() { 0 } else { EXIT_COUNTEREXAMPLE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, msg }) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
