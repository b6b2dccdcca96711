use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maskstl::PaddingPolicy;
use maskstl_cli::bench::{BenchConfig, SIZES};
use maskstl_cli::commands::{self, parse_padding, EngineArg, EvalOptions, MineArgs, PlanArgs};
use maskstl_cli::{csvio, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "maskstl",
    version,
    about = "STL robustness evaluation, benchmarks and optimization demos"
)]
struct Cli {
    /// Reduction semantics.
    #[arg(long, global = true, value_parser = ["hard", "softmax", "lse"])]
    mode: Option<String>,
    /// Temperature for softmax / lse.
    #[arg(long, global = true, default_value_t = 1.0)]
    temp: f64,
    /// Padding past the end of the signal: `last` or `const:<v>`.
    #[arg(long, global = true, default_value = "last", value_parser = parse_padding)]
    padding: PaddingPolicy,
    #[arg(long, global = true, value_enum, default_value_t = EngineArg::Masking)]
    engine: EngineArg,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Robustness of the whole signal.
    Eval { formula: String, csv: PathBuf },
    /// Full robustness trace.
    Trace { formula: String, csv: PathBuf },
    /// Time masking against recurrent evaluation.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = SIZES)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        #[arg(long, default_value_t = 8)]
        batch: usize,
        /// Formula indices 1..=6.
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5, 6])]
        formulas: Vec<usize>,
        /// Skip gradient timings.
        #[arg(long)]
        no_grad: bool,
    },
    /// Mine the interval of `G[aL, bL] (s > 0)`.
    Mine {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dataset CSV, one column per signal.
        #[arg(long, conflicts_with = "generate")]
        data: Option<PathBuf>,
        /// Generate the synthetic dataset with this seed (default: --seed).
        #[arg(long)]
        generate: Option<u64>,
        /// Dump an N x N loss grid over (a, b).
        #[arg(long, value_name = "N", requires = "contour_out")]
        contour: Option<usize>,
        #[arg(long, value_name = "CSV")]
        contour_out: Option<PathBuf>,
    },
    /// Plan a trajectory through the target box to the goal box.
    Plan {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the state sequence as CSV.
        #[arg(long, value_name = "CSV")]
        states: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<serde_json::Value> {
    let opts = EvalOptions {
        mode: cli.mode.clone().unwrap_or_else(|| "hard".into()),
        temperature: cli.temp,
        padding: cli.padding,
        engine: cli.engine,
    };
    match cli.command {
        Command::Eval { formula, csv } => commands::eval(&formula, &csvio::read_signals_file(&csv)?, &opts),
        Command::Trace { formula, csv } => commands::trace(&formula, &csvio::read_signals_file(&csv)?, &opts),
        Command::Bench {
            sizes,
            reps,
            warmup,
            batch,
            formulas,
            no_grad,
        } => commands::bench(&BenchConfig {
            formulas,
            sizes,
            batch,
            reps,
            warmup,
            gradients: !no_grad,
            seed: cli.seed,
            ..BenchConfig::default()
        }),
        Command::Mine {
            config,
            data,
            generate,
            contour,
            contour_out,
        } => commands::mine(&MineArgs {
            config,
            data,
            seed: generate.unwrap_or(cli.seed),
            mode: cli.mode,
            contour,
            contour_out,
        }),
        Command::Plan { config, states } => commands::plan(&PlanArgs {
            config,
            seed: cli.seed,
            mode: cli.mode,
            states_out: states,
        }),
    }
}

fn emit(value: &serde_json::Value, out: Option<&PathBuf>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = cli.out.clone();
    match run(cli).and_then(|v| emit(&v, out.as_ref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
