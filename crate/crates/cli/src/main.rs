use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lexrsm::frontend::parse_program;
use lexrsm::linear::parse_rat;
use lexrsm_cli::commands::{self, PcfgFormat, ProveOptions, SimulateOptions, VerifyOptions};
use lexrsm_cli::generate::{generate, GeneratorSpec};
use lexrsm_cli::report::{Report, Verdict};

const THREADS_VAR: &str = "LEXRSM_THREADS";

#[derive(Parser)]
#[command(name = "lexrsm", version, about = "Termination proofs for affine probabilistic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize and check a lexicographic ranking certificate.
    Prove(ProveArgs),
    /// `prove --compositional`.
    Compose(ProveArgs),
    /// `prove --bound`.
    Bound(ProveArgs),
    /// Monte Carlo runs of a program.
    Simulate(SimulateArgs),
    /// Re-check an exported certificate.
    Verify(VerifyArgs),
    /// Print a scalability benchmark program.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitFormat {
    Text,
    Dot,
}

#[derive(Args)]
struct ProveArgs {
    file: PathBuf,
    /// Loop-by-loop proof with one NCSM per loop.
    #[arg(long)]
    compositional: bool,
    /// Also derive an expected-runtime bound.
    #[arg(long)]
    bound: bool,
    /// Invariant sidecar file.
    #[arg(long, value_name = "FILE")]
    invariants: Option<PathBuf>,
    #[arg(long, default_value = "1", value_parser = parse_positive_rat)]
    epsilon: lexrsm::linear::Rat,
    /// Include the graph in the report (and print it).
    #[arg(long, value_name = "FORMAT", num_args = 0..=1, default_missing_value = "text")]
    emit_pcfg: Option<EmitFormat>,
    #[arg(long)]
    no_sample_check: bool,
    /// Samples per location for the pointwise check.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Valuation for the numeric bound, e.g. `x=5,y=7`.
    #[arg(long)]
    at: Option<String>,
    /// Restrict compositional maps to one dimension.
    #[arg(long)]
    one_dimensional: bool,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
    /// Write the certificate alone here.
    #[arg(long, value_name = "OUT")]
    certificate: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrialFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SimulateArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = lexrsm::sim::DEFAULT_CAP)]
    cap: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `uniform`, `adversarial` or `scripted:b0,v3/2,...`.
    #[arg(long, default_value = "uniform", value_parser = commands::parse_policy)]
    policy: lexrsm::sim::SchedulerPolicy,
    /// Initial valuation; defaults to a point of the initial set.
    #[arg(long)]
    at: Option<String>,
    /// Write per-trial results here.
    #[arg(long, value_name = "OUT")]
    trials_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    trials_format: TrialFormat,
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    cert: PathBuf,
    #[arg(long)]
    no_sample_check: bool,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Re-draw every variable by a coin instead of a nondeterministic choice.
    #[arg(long)]
    no_ndet: bool,
    #[arg(long, value_name = "OUT")]
    out: Option<PathBuf>,
}

fn parse_positive_rat(s: &str) -> Result<lexrsm::linear::Rat, String> {
    parse_rat(s)
        .filter(|r| *r > lexrsm::linear::rat(0))
        .ok_or_else(|| format!("expected a positive rational, got `{s}`"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if path == Path::new("-") {
        print!("{text}");
        Ok(())
    } else {
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}

fn emit(report: &Report, json: Option<&Path>) -> Result<u8> {
    if let Some(path) = json {
        write(path, &report.to_json())?;
    }
    if json != Some(Path::new("-")) {
        println!("{}", commands::headline(report));
        if let Some(cert) = &report.certificate {
            for (j, comp) in cert["components"].as_array().into_iter().flatten().enumerate() {
                let parts: Vec<String> = comp
                    .as_object()
                    .into_iter()
                    .flatten()
                    .map(|(k, v)| format!("{k}: {}", v.as_str().unwrap_or("?")))
                    .collect();
                println!("  eta{} = {{{}}}", j + 1, parts.join(", "));
            }
        }
        if let Some(comp) = &report.compositional {
            for c in comp["ledger"].as_array().into_iter().flatten() {
                println!("  loop {} (depth {}): dimension {}, over {}", c["loop"], c["depth"], c["dimension"], c["variables"]);
            }
        }
        if let Some(pcfg) = report.extra.get("pcfg").and_then(|v| v.as_str()) {
            print!("{pcfg}");
        }
    }
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    Ok(report.verdict.exit_code() as u8)
}

fn run_prove(args: ProveArgs, force_compositional: bool, force_bound: bool) -> Result<u8> {
    let source = read(&args.file)?;
    let sidecar = args.invariants.as_deref().map(read).transpose()?;
    let opts = ProveOptions {
        compositional: args.compositional || force_compositional,
        bound: args.bound || force_bound,
        epsilon: args.epsilon,
        sample_check: !args.no_sample_check,
        samples: args.samples,
        seed: args.seed,
        emit_pcfg: args.emit_pcfg.map(|f| match f {
            EmitFormat::Text => PcfgFormat::Text,
            EmitFormat::Dot => PcfgFormat::Dot,
        }),
        at: args.at,
        one_dimensional: args.one_dimensional,
    };
    let report = commands::prove(&source, sidecar.as_deref(), &opts);
    if let (Some(path), Some(cert)) = (&args.certificate, &report.certificate) {
        let mut text = serde_json::to_string_pretty(cert)?;
        text.push('\n');
        write(path, &text)?;
    }
    emit(&report, args.json.as_deref())
}

fn run_simulate(args: SimulateArgs) -> Result<u8> {
    let source = read(&args.file)?;
    let opts = SimulateOptions { trials: args.trials, cap: args.cap, seed: args.seed, policy: args.policy, at: args.at };
    let (report, runs) = commands::simulate(&source, &opts);
    if let Some(path) = &args.trials_out {
        let text = match args.trials_format {
            TrialFormat::Csv => {
                let vars = parse_program(&source).map(|a| a.vars).unwrap_or_default();
                commands::runs_csv(&vars, &runs)
            }
            TrialFormat::Json => {
                let vars = parse_program(&source).map(|a| a.vars).unwrap_or_default();
                commands::runs_json(&vars, &runs)
            }
        };
        write(path, &text)?;
    }
    emit(&report, args.json.as_deref())
}

fn run_verify(args: VerifyArgs) -> Result<u8> {
    let source = read(&args.file)?;
    let cert = read(&args.cert)?;
    let opts = VerifyOptions { sample_check: !args.no_sample_check, samples: args.samples, seed: args.seed };
    emit(&commands::verify(&source, &cert, &opts), args.json.as_deref())
}

fn run_generate(args: GenerateArgs) -> Result<u8> {
    let spec = GeneratorSpec { n: args.n, seed: args.seed, ndet: !args.no_ndet };
    match generate(&spec) {
        Ok(text) => {
            write(args.out.as_deref().unwrap_or(Path::new("-")), &text)?;
            Ok(0)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(Verdict::UsageError.exit_code() as u8)
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_VAR} must be a number, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { Verdict::UsageError.exit_code() as u8 } else { 0 });
        }
    };
    let result = init_threads().and_then(|()| match cli.command {
        Command::Prove(a) => run_prove(a, false, false),
        Command::Compose(a) => run_prove(a, true, false),
        Command::Bound(a) => run_prove(a, false, true),
        Command::Simulate(a) => run_simulate(a),
        Command::Verify(a) => run_verify(a),
        Command::Generate(a) => run_generate(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Verdict::UsageError.exit_code() as u8)
        }
    }
}
