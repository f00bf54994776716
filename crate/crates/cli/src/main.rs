use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lfwave_cli::{inspect, runner, schema, with_workers, RunResult, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "lfwave", version, about = "Wave packet frames over local fields of positive characteristic")]
struct Cli {
    /// worker threads for parallel sections (0 = one per core)
    #[arg(long, global = true, env = WORKERS_ENV, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its report bundle
    Run {
        config: PathBuf,
        /// output directory, overriding the config
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run a sweep spec and write sweep.csv, summary.json and per-instance reports
    Sweep {
        spec: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Summarize a function, matrix, report or sweep-summary file
    Inspect { file: PathBuf },
    /// Print the JSON Schema of a config file kind
    Schema {
        #[arg(value_enum, default_value_t = SchemaKind::Experiment)]
        kind: SchemaKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemaKind {
    Experiment,
    Sweep,
}

fn execute(cli: Cli) -> RunResult<String> {
    match cli.command {
        Command::Run { config, output } => {
            let out = with_workers(cli.workers, || runner::run_experiment(&config, output.as_deref()))??;
            let mut text = format!("wrote {}\n", out.directory.display());
            for r in &out.reports {
                let variant = r.variant.as_deref().map(|v| format!(" ({v})")).unwrap_or_default();
                text.push_str(&format!(
                    "{}{variant}: condition {}, frame {}, bounds [{:e}, {:e}]\n",
                    r.theorem_id, r.verdict_condition, r.verdict_frame, r.actual_bounds.lower, r.actual_bounds.upper
                ));
            }
            Ok(text)
        }
        Command::Sweep { spec, output } => {
            let out = with_workers(cli.workers, || runner::run_sweep(&spec, output.as_deref()))??;
            let mut text = format!("wrote {} ({} instances)\n", out.directory.display(), out.instances.len());
            for s in &out.summaries {
                let variant = s.variant.as_deref().map(|v| format!(" ({v})")).unwrap_or_default();
                text.push_str(&format!("{}{variant}: {} violations in {} instances\n", s.theorem_id, s.violations, s.instances));
            }
            Ok(text)
        }
        Command::Inspect { file } => inspect::inspect(&file),
        Command::Schema { kind } => Ok(match kind {
            SchemaKind::Experiment => schema::EXPERIMENT,
            SchemaKind::Sweep => schema::SWEEP,
        }
        .to_string()),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
