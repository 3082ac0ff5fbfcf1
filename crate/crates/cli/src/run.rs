//! Simulation, sweep, and re-analysis entry points behind the CLI.

use std::fs;
use std::path::{Path, PathBuf};

use glottis::{analysis, simulate, AnalysisError, NetworkError, Report, Waveform};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig, SweepConfig};
use crate::export::{self, ExportError, SweepRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver error: {0}")]
    Solver(#[from] NetworkError),
    #[error("analysis error: {0}")]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Export(#[from] ExportError),
}

impl CliError {
    /// 2 config, 3 solver, 4 I/O (including unreadable input files).
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(ConfigError::Read { .. }) => 4,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Analysis(_) | CliError::Export(_) => 4,
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| {
        CliError::Export(ExportError::Io {
            path: dir.to_path_buf(),
            source,
        })
    })
}

#[derive(Debug)]
pub struct SimulationOutcome {
    pub waveform: Waveform,
    pub derivative: Vec<f64>,
    pub report: Report,
    pub report_text: String,
    pub files: Vec<PathBuf>,
}

/// Simulates and analyzes without touching the filesystem.
pub fn simulate_config(cfg: &RunConfig) -> Result<(Waveform, Vec<f64>, Report), CliError> {
    cfg.validate()?;
    let circuit = cfg.circuit()?;
    let w = simulate(&circuit, cfg.duration_s, cfg.sample_rate_hz as f64)?;
    let d = analysis::derivative(&w)?;
    let report = analysis::report(&w)?;
    Ok((w, d, report))
}

/// Writes `waveform.csv`, `report.txt`, and with `output.wav` also
/// `u_gl.wav` and `du_gl_dt.wav` into the output directory.
pub fn run_simulate(cfg: &RunConfig) -> Result<SimulationOutcome, CliError> {
    let (waveform, derivative, report) = simulate_config(cfg)?;
    let dir = &cfg.output.dir;
    create_dir(dir)?;

    let drive = cfg.drive()?.value();
    let report_text = export::report_text(&report, &waveform, Some((cfg.pressure_cmh2o, drive)));
    let mut files = Vec::new();

    let csv = dir.join("waveform.csv");
    export::export_csv(&waveform, &derivative, &csv)?;
    files.push(csv);
    if cfg.output.wav {
        let flow = dir.join("u_gl.wav");
        export::export_wav(&waveform.u_gl, cfg.sample_rate_hz, &flow)?;
        files.push(flow);
        let excitation = dir.join("du_gl_dt.wav");
        export::export_wav(&derivative, cfg.sample_rate_hz, &excitation)?;
        files.push(excitation);
    }
    let report_path = dir.join("report.txt");
    export::export_report(&report_text, &report_path)?;
    files.push(report_path);

    Ok(SimulationOutcome {
        waveform,
        derivative,
        report,
        report_text,
        files,
    })
}

/// Runs every sweep point (in parallel) and writes `sweep.csv`.
///
/// Nothing is left on disk if any point fails.
pub fn run_sweep(cfg: &SweepConfig) -> Result<(Vec<SweepRow>, PathBuf), CliError> {
    cfg.validate()?;
    let path = cfg.base.output.dir.join("sweep.csv");
    let rows: Result<Vec<SweepRow>, CliError> = cfg
        .pressures()
        .into_par_iter()
        .map(|p| {
            let point = RunConfig {
                pressure_cmh2o: p,
                ..cfg.base.clone()
            };
            let (_, _, report) = simulate_config(&point)?;
            Ok(SweepRow {
                pressure_cmh2o: p,
                drive_v: point.drive()?.value(),
                peak_flow: report.peak_flow,
                f0_hz: report.f0_hz,
                max_negative_derivative: report.max_negative_derivative.0,
            })
        })
        .collect();
    let rows = match rows {
        Ok(rows) => rows,
        Err(e) => {
            let _ = fs::remove_file(&path);
            return Err(e);
        }
    };
    create_dir(&cfg.base.output.dir)?;
    export::export_sweep(&rows, &path)?;
    Ok((rows, path))
}

/// Re-runs the analysis on an exported waveform CSV.
pub fn run_analyze(csv: &Path) -> Result<(Report, String), CliError> {
    let (w, _) = export::read_waveform_csv(csv)?;
    let report = analysis::report(&w)?;
    let text = export::report_text(&report, &w, None);
    Ok((report, text))
}
