use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gossip_age_cli::{load_config, preset, run, HarnessError, RunOptions};

// a reader may close the pipe early (e.g. `gossip-age preset fig8 | head`);
// that is not an error worth dying over
fn out_line(text: &str) {
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn err_line(text: &str) {
    let _ = writeln!(std::io::stderr(), "{text}");
}

/// Version-age sweeps over gossip networks with mobility: exact solves,
/// simulation, and analytic bounds from one config.
#[derive(Parser)]
#[command(name = "gossip-age", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep from a config file or a built-in preset
    Run {
        /// Path to a scenario config (or a manifest from an earlier run)
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Built-in preset: fig6, fig7, fig8, or fig9
        #[arg(long, value_name = "NAME")]
        preset: Option<String>,
        /// Output directory override
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Simulation seed override
        #[arg(long)]
        seed: Option<u64>,
        /// Cap on concurrent sweep points
        #[arg(long, value_name = "K")]
        workers: Option<usize>,
        /// Skip writing plot.svg
        #[arg(long)]
        no_plot: bool,
    },
    /// Print a built-in preset config as JSON
    Preset {
        /// fig6, fig7, fig8, or fig9
        name: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match cli.command {
        Command::Preset { name } => match preset(&name) {
            Ok(cfg) => {
                out_line(&serde_json::to_string_pretty(&cfg).expect("preset serializes"));
                ExitCode::SUCCESS
            }
            Err(e) => {
                err_line(&format!("error: {e}"));
                ExitCode::from(1)
            }
        },
        Command::Run {
            config,
            preset: preset_name,
            out,
            seed,
            workers,
            no_plot,
        } => {
            let loaded = match (config, preset_name) {
                (Some(_), Some(_)) => Err(HarnessError::Config(
                    "give either --config or --preset, not both".into(),
                )),
                (None, None) => Err(HarnessError::Config(
                    "one of --config or --preset is required".into(),
                )),
                (Some(path), None) => load_config(&path),
                (None, Some(name)) => preset(&name),
            };
            let cfg = match loaded {
                Ok(c) => c,
                Err(e) => {
                    err_line(&format!("error: {e}"));
                    return ExitCode::from(1);
                }
            };
            let options = RunOptions {
                out,
                seed,
                workers,
                no_plot,
            };
            match run(cfg, &options) {
                Ok(outcome) => {
                    out_line(&format!(
                        "wrote {} ({} rows)",
                        outcome.output_dir.join("results.csv").display(),
                        outcome.result.rows.len()
                    ));
                    if outcome.failures.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        for f in &outcome.failures {
                            err_line(&format!(
                                "engine failure at sweep value {} ({}): {}",
                                f.sweep_value, f.engine, f.message
                            ));
                        }
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    err_line(&format!("error: {e}"));
                    ExitCode::from(1)
                }
            }
        }
    }
}
