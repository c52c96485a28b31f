//! `pastgames`: solve and analyse zero-sum games with past-discounted
//! objectives from the command line.
//!
//! Exit codes: 0 on success, 2 for invalid input (arguments, documents,
//! parameters out of range, unsupported arena classes), 3 when a solver
//! fails or a budget is exhausted. Diagnostics are a single line on stderr
//! of the form `error[<kind>]: <message>`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "pastgames", version, about = "Zero-sum stochastic games with past-discounted payoffs")]
pub struct Cli {
    /// Worker threads; 1 runs everything sequentially. Results do not
    /// depend on this setting.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ArenaArg {
    /// Arena file in the JSON schema. `fig1.json` falls back to the bundled
    /// unbounded-memory example when no such file exists.
    #[arg(long, value_name = "PATH")]
    pub arena: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and check an arena file.
    Validate(ArenaArg),

    /// Report the structural class of an arena.
    Classify(ArenaArg),

    /// Evaluate a payoff on an ultimately periodic sequence "u1,u2;v1,v2".
    Payoff {
        #[arg(long, allow_hyphen_values = true)]
        seq: String,
        #[arg(long, value_enum)]
        kind: PayoffArg,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        #[arg(long)]
        ell: Option<u64>,
    },

    /// Solve a game and print the value report as JSON.
    Solve {
        #[command(flatten)]
        arena: ArenaArg,
        #[arg(long, value_enum)]
        objective: Objective,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        #[arg(long)]
        ell: Option<u64>,
        /// Accuracy target of the iterative back-ends.
        #[arg(long, default_value = "1e-6")]
        eps: String,
        /// Iteration cap for value iteration.
        #[arg(long, default_value_t = 50_000_000)]
        max_iterations: usize,
        /// Product-state cap for window objectives.
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },

    /// Build the history product of a window objective and print it in the
    /// arena schema. A state mapping is written next to it.
    #[command(after_help = "The mapping file is a JSON object {product state: {\"base\": state, \"memory\": [[state, min action, max action], ...]}}.\n\
It goes to --mapping, or to <out>.mapping.json when only --out is given.")]
    WindowExpand {
        #[command(flatten)]
        arena: ArenaArg,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long)]
        ell: u64,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
        #[arg(long, value_name = "PATH")]
        mapping: Option<PathBuf>,
    },

    /// Compare (1-λ)·Val(DλPγ) with Val(MPγ) along a grid of λ.
    #[command(after_help = "CSV columns: lambda, state, estimate, reference, abs_error")]
    Sweep {
        #[command(flatten)]
        arena: ArenaArg,
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_name = "LIST")]
        lambda_grid: String,
        #[arg(long, default_value = "1e-6")]
        eps: String,
    },

    /// Regenerate the counterexample tables as CSV.
    Repro {
        #[command(subcommand)]
        what: Repro,
    },

    /// Solve a matrix game given as whitespace-separated rows.
    MatrixSolve {
        #[arg(long, value_name = "PATH")]
        matrix: PathBuf,
        /// Largest acceptable duality gap.
        #[arg(long, default_value = "1e-9")]
        tol: String,
    },

    /// Sample a play under two stationary strategies (uniform by default).
    Simulate {
        #[command(flatten)]
        arena: ArenaArg,
        #[arg(long, value_name = "PATH")]
        min_strategy: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        max_strategy: Option<PathBuf>,
        /// Initial state id; the first state by default.
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum Repro {
    /// Lower past-discounted payoffs of the three witness sequences.
    #[command(after_help = "CSV columns: gamma, p_x, p_y, p_z, witness, p_x_exact, p_y_exact, p_z_exact")]
    Submixing {
        /// Comma-separated γ values; 0.05, 0.10, ..., 0.90 by default.
        #[arg(long, value_name = "LIST")]
        gammas: Option<String>,
    },
    /// Trajectory of P^n on the bundled arena under a pumping strategy.
    #[command(after_help = "CSV columns: n, weight, p_n, running_min (empty during burn-in)")]
    Pumping {
        #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
        gamma: String,
        /// Cap on the number of b-loops per visit.
        #[arg(long, default_value_t = 20, conflicts_with_all = ["unbounded", "always_b"])]
        cap: u64,
        #[arg(long)]
        unbounded: bool,
        #[arg(long)]
        always_b: bool,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
    /// Payoff with and without a prefix, plus the split identity.
    #[command(after_help = "CSV columns: gamma, with_prefix, without_prefix, holds, decomposition")]
    Prefix {
        #[arg(long, default_value = "1000000", allow_hyphen_values = true)]
        prefix: String,
        #[arg(long, default_value = "3,4,5", allow_hyphen_values = true)]
        cycle: String,
        #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
        gamma: String,
    },
    /// Best positional value against the capped pumping family.
    #[command(after_help = "CSV columns: kind, cap, state, value, decimal\n\
kind is positional (per state), pumping (per cap, from the first state), rate ((value - limit)/γ^cap), limit or gap.")]
    Gap {
        #[arg(long, default_value = "fig1.json")]
        arena: PathBuf,
        #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, default_value = "1,2,5,10,20", value_name = "LIST")]
        caps: String,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Discounted,
    PdDiscounted,
    Mean,
    PdMean,
    Liminf,
    Window,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayoffArg {
    Limit,
    Mean,
    Discounted,
    PdLower,
    PdUpper,
    Window,
    PdDiscounted,
    PdMean,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[usage]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error{}", e.message.replace('\n', " "));
            ExitCode::from(e.code)
        }
    }
}
