use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use glottis::Pressure;
use glottis_cli::config::load_config_unvalidated;
use glottis_cli::{run_analyze, run_simulate, run_sweep, CliError, RunConfig, SweepConfig};

#[derive(Parser)]
#[command(name = "glottis", version, about = "Circuit model of the glottal voice source")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run and write waveform, report, and optional WAV files.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Lung pressure in cmH2O.
        #[arg(long)]
        pressure: Option<f64>,
        /// Duration in seconds.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        wav: bool,
    },
    /// Sweep lung pressure and tabulate peak flow, F0, and excitation.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 7.0)]
        from: f64,
        #[arg(long, default_value_t = 10.0)]
        to: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the analysis on an exported waveform CSV.
    Analyze {
        #[arg(long)]
        csv: PathBuf,
    },
}

fn base_config(path: Option<&PathBuf>, out: Option<PathBuf>) -> Result<RunConfig, CliError> {
    let mut cfg = match path {
        Some(p) => load_config_unvalidated(p)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = out {
        cfg.output.dir = dir;
    }
    Ok(cfg)
}

fn warn_outside_span(pressure: f64) {
    if let Ok(p) = Pressure::new(pressure) {
        if !p.is_within_regression_span() {
            eprintln!("warning: {pressure} cmH2O lies outside the 5.94-15 cmH2O regression span");
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            pressure,
            duration,
            out,
            wav,
        } => {
            let mut cfg = base_config(config.as_ref(), out)?;
            if let Some(p) = pressure {
                cfg.pressure_cmh2o = p;
            }
            if let Some(d) = duration {
                cfg.duration_s = d;
            }
            cfg.output.wav |= wav;
            cfg.validate()?;
            warn_outside_span(cfg.pressure_cmh2o);
            let outcome = run_simulate(&cfg)?;
            print!("{}", outcome.report_text);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep {
            config,
            from,
            to,
            step,
            out,
        } => {
            let sweep = SweepConfig {
                start_cmh2o: from,
                stop_cmh2o: to,
                step_cmh2o: step,
                base: base_config(config.as_ref(), out)?,
            };
            warn_outside_span(from);
            warn_outside_span(to);
            let (rows, path) = run_sweep(&sweep)?;
            print!("{}", glottis_cli::export::sweep_csv(&rows));
            println!("wrote {}", path.display());
        }
        Command::Analyze { csv } => {
            let (_, text) = run_analyze(&csv)?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
