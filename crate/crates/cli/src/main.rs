//! `cohere`: benchmark generation, prompting, scoring and solving for signed
//! coherence graphs.
//!
//! Exit codes: 0 success, 1 verification or scoring failure, 2 usage or
//! input error (including solver capacity), 3 transport failure.

mod cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cohere_core::cover::CoverMethod;
use cohere_core::model::Regime;
use cohere_core::solver::SolveMethod;
use cohere_core::star::SfdMethod;
use cohere_core::Exec;

#[derive(Debug, Parser)]
#[command(name = "cohere", version, about = "Signed coherence graph benchmark toolkit")]
struct Cli {
    /// Run data-parallel loops on one thread (results are identical).
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a benchmark directory.
    Gen(GenArgs),
    /// Check every problem's propositions against its graph.
    Verify(VerifyArgs),
    /// Synthesise propositions that model a signed graph.
    Model(ModelArgs),
    /// Print the prompt for one problem, or for a practical proposition file.
    Prompt(PromptArgs),
    /// Send prompts to an endpoint and store the raw responses.
    Run(RunArgs),
    /// Score a run against its benchmark and write CSV reports.
    Score(ScoreArgs),
    /// Median consensus of repeated responses plus a convergence table.
    Consensus(ConsensusArgs),
    /// Maximise coherence over the cuts of a graph.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Benchmark configuration (JSON); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace an existing benchmark in `--out`.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    bench: PathBuf,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Graph JSON file.
    graph: PathBuf,
    #[arg(long, default_value = "percolation")]
    cover: CoverMethod,
    #[arg(long, default_value = "greedy")]
    sfd: SfdMethod,
    #[arg(long, default_value = "base")]
    regime: Regime,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PromptArgs {
    /// Benchmark directory.
    bench: Option<PathBuf>,
    #[arg(long, requires = "bench")]
    problem: Option<String>,
    #[arg(long, default_value = "base")]
    regime: Regime,
    /// Practical proposition file instead of a benchmark problem.
    #[arg(long, conflicts_with_all = ["bench", "problem"])]
    practical: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Benchmark directory.
    #[arg(required_unless_present = "practical")]
    bench: Option<PathBuf>,
    /// Endpoint configuration (JSON). API keys come from the environment
    /// or the credentials file it names.
    #[arg(long)]
    config: PathBuf,
    /// Directory holding runs.
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the model name.
    #[arg(long)]
    run_id: Option<String>,
    #[arg(long, default_value_t = 1)]
    attempts: u64,
    /// Restrict to these regimes (repeatable); all five by default.
    #[arg(long)]
    regime: Vec<Regime>,
    /// Query a practical proposition file instead of a benchmark.
    #[arg(long, conflicts_with = "bench")]
    practical: Option<PathBuf>,
    /// Print the prompts that would be sent and exit.
    #[arg(long)]
    dry_run: bool,
    /// Allow reusing a run directory made against a different benchmark.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    bench: PathBuf,
    run: PathBuf,
    /// Output directory for the CSVs; defaults to the run directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConsensusArgs {
    run: PathBuf,
    #[arg(long)]
    problem: String,
    /// Response variant (`practical` or a regime); inferred when unique.
    #[arg(long)]
    variant: Option<String>,
    /// Subsample sizes, e.g. `1,5,10,30`; defaults to 1..=N.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; defaults to `<run>/<problem>`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Graph JSON file.
    graph: PathBuf,
    #[arg(long, default_value = "exact")]
    method: SolveMethod,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also report Gibbs acceptance probabilities at this temperature.
    #[arg(long)]
    temperature: Option<f64>,
    /// Print the 2-XORSAT instance instead of solving.
    #[arg(long)]
    xorsat: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    let result = match cli.command {
        Command::Gen(a) => cmd::gen(a, exec),
        Command::Verify(a) => cmd::verify(a, exec),
        Command::Model(a) => cmd::model(a),
        Command::Prompt(a) => cmd::prompt(a),
        Command::Run(a) => cmd::run(a),
        Command::Score(a) => cmd::score(a),
        Command::Consensus(a) => cmd::consensus(a, exec),
        Command::Solve(a) => cmd::solve(a, exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
