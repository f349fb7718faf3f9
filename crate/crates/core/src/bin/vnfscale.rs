use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vnfscale::scenario::{
    compare_solvers, format_sweep, run_scenario, sweep_topologies, time_budget, Overrides, Scenario, SolverKind,
    TIME_BUDGET_ENV,
};

/// Detect overloaded or underloaded VNF groups and rescale them.
#[derive(Parser)]
#[command(name = "vnfscale", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and check its expectations.
    Run {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Model sizes and solve times across fat-tree sizes.
    #[command(after_help = format!("The per-model time budget is read from {} (seconds, default 1200).", TIME_BUDGET_ENV))]
    Sweep {
        /// Comma-separated fat-tree arities.
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        k: Vec<usize>,
    },
    /// Per-iteration gap between the distributed solver and the central LP.
    Compare {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// ADMM penalty parameter.
    #[arg(long)]
    beta: Option<f64>,
    /// Seed for the block permutations.
    #[arg(long)]
    seed: Option<u64>,
    /// ADMM iteration cap.
    #[arg(long)]
    iters: Option<usize>,
    /// lp, milp, rpadmm or all.
    #[arg(long)]
    solver: Option<SolverKind>,
    /// Directory for report.txt, decisions.csv and trace.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Flags {
    fn overrides(self) -> Overrides {
        Overrides {
            beta: self.beta,
            seed: self.seed,
            iters: self.iters,
            solver: self.solver,
            out_dir: self.out_dir,
            time_budget: Some(time_budget()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { file, flags } => run_scenario(&file, &flags.overrides()).map(|report| {
            print!("{}", report);
            report.exit_code()
        }),
        Command::Sweep { k } => sweep_topologies(&k, time_budget()).map(|rows| {
            print!("{}", format_sweep(&rows));
            0
        }),
        Command::Compare { file, flags } => Scenario::load(&file)
            .and_then(|s| compare_solvers(&s, &flags.overrides()))
            .map(|report| {
                print!("{}", report);
                0
            }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
