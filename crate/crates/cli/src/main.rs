use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use slipt::scenario::SweepAxis;
use slipt_cli::commands::{self, Outcome, PolicyChoice, SweepOutputs, EXIT_CONFIG_ERROR};
use slipt_cli::config::{self, DEFAULT_PRESET};

/// Energy harvesting versus QoS optimization for indoor optical wireless links
#[derive(Parser)]
#[command(name = "slipt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario config (JSON). Without it the preset is used as-is.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Preset applied underneath the config; overrides the config's own `preset`.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Rth,
    N,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one policy and print the operating point
    Solve {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "tsbo")]
        policy: PolicyChoice,
    },
    /// Sweep the rate threshold or the neighbor count and write a CSV table
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Sweep axis; defaults to the config's `sweep.axis`
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
        /// CSV destination (stdout if omitted and not set in the config)
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Also write the records as JSON
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Directory receiving fig3.csv / fig4.csv for plotting
        #[arg(long, value_name = "DIR")]
        plot_data: Option<PathBuf>,
    },
    /// Compare the closed-form solvers with the brute-force grid oracle
    OracleCheck {
        #[command(flatten)]
        source: Source,
        /// Grid points per axis; defaults to the config's `oracle_grid`
        #[arg(long, value_name = "INT")]
        grid: Option<usize>,
    },
    /// Print a resolved preset as JSON
    PresetDump {
        #[arg(long, value_name = "NAME", default_value = DEFAULT_PRESET)]
        preset: String,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let mut stdout = io::stdout().lock();
    let load = |s: &Source| config::load(s.config.as_deref(), s.preset.as_deref());
    match cli.command {
        Command::Solve { source, policy } => {
            commands::cmd_solve(&load(&source)?, policy, &mut stdout)
        }
        Command::Sweep {
            source,
            axis,
            out,
            json,
            plot_data,
        } => {
            let cfg = load(&source)?;
            let axis = axis.map(|a| match a {
                AxisArg::Rth => SweepAxis::RateThreshold,
                AxisArg::N => SweepAxis::NeighborCount,
            });
            let outputs = SweepOutputs {
                csv: out.as_deref().or(cfg.output.csv.as_deref()),
                json: json.as_deref().or(cfg.output.json.as_deref()),
                plot_data_dir: plot_data.as_deref().or(cfg.output.plot_data_dir.as_deref()),
            };
            commands::cmd_sweep(&cfg, axis, outputs, &mut stdout)
        }
        Command::OracleCheck { source, grid } => {
            commands::cmd_oracle_check(&load(&source)?, grid, &mut stdout)
        }
        Command::PresetDump { preset, out } => match out {
            Some(path) => {
                let mut buf = Vec::new();
                let outcome = commands::cmd_preset_dump(&preset, &mut buf)?;
                std::fs::write(&path, buf)?;
                Ok(outcome)
            }
            None => commands::cmd_preset_dump(&preset, &mut stdout),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_CONFIG_ERROR)
        }
    }
}
