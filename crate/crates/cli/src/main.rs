mod config;
mod pipeline;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exit status for command-line usage errors (distinct from the verdict codes).
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "dpoq", version, about = "Constant-depth proofs of quantumness at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a circuit to branching programs and report encoding sizes.
    Compile(pipeline::CompileArgs),
    /// Encode an input with fresh or given randomness.
    Encode(pipeline::EncodeArgs),
    /// Decode an encoded output.
    Decode(pipeline::DecodeArgs),
    /// Recover the randomness behind an encoded output.
    Reconstruct(pipeline::ReconstructArgs),
    /// Trapdoor claw-free function utilities.
    #[command(subcommand)]
    Tcf(pipeline::TcfCommand),
    /// Run a protocol session.
    Run(run::RunArgs),
    /// Check the depth meters of honest rounds against the expected table.
    VerifyDepth(run::VerifyDepthArgs),
    /// Measure sparse simulator throughput.
    Bench(BenchArgs),
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 500, env = "DPOQ_QUBITS")]
    qubits: usize,
    /// Time budget in milliseconds.
    #[arg(long, default_value_t = 1000, env = "DPOQ_MILLIS")]
    millis: u64,
    #[arg(long, default_value_t = 0, env = "DPOQ_SEED")]
    seed: u64,
    /// Fail unless at least this many gates per second are reached.
    #[arg(long)]
    min_rate: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Toy,
    Rabin,
}

impl From<FamilyArg> for dpoq_core::tcf::Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Toy => dpoq_core::tcf::Family::Toy,
            FamilyArg::Rabin => dpoq_core::tcf::Family::Rabin,
        }
    }
}

fn bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let report = dpoq_qsim::bench::sparse_throughput(args.qubits, Duration::from_millis(args.millis), &mut rng)?;
    emit(&serde_json::to_string_pretty(&report)?)?;
    match args.min_rate {
        Some(min) if report.gates_per_second < min => {
            eprintln!("throughput {:.3e} gates/s is below {min:.3e}", report.gates_per_second);
            Ok(ExitCode::FAILURE)
        }
        _ => Ok(ExitCode::SUCCESS),
    }
}

/// Prints a line to stdout; a closed pipe on the reading end is not an error.
pub fn emit(text: &str) -> std::io::Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

pub fn read(path: &PathBuf) -> anyhow::Result<String> {
    use anyhow::Context;
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Compile(a) => pipeline::compile(a),
        Command::Encode(a) => pipeline::encode(a),
        Command::Decode(a) => pipeline::decode(a),
        Command::Reconstruct(a) => pipeline::reconstruct(a),
        Command::Tcf(c) => pipeline::tcf(c),
        Command::Run(a) => run::run(a),
        Command::VerifyDepth(a) => run::verify_depth(a),
        Command::Bench(a) => bench(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
