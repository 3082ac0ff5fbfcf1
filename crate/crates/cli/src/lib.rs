//! Configuration, orchestration, and file export for the glottal source
//! simulator.

pub mod config;
pub mod export;
pub mod run;

pub use config::{load_config, parse_config, ConfigError, RunConfig, SweepConfig};
pub use export::{export_csv, export_wav, read_waveform_csv, SweepRow};
pub use run::{run_analyze, run_simulate, run_sweep, simulate_config, CliError, SimulationOutcome};
