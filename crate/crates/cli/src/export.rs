//! Waveform CSV, 16-bit PCM WAV, and plain-text report files.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use glottis::{Report, Waveform};
use thiserror::Error;

pub const WAVEFORM_HEADER: &str = "time_s,u_gl,du_gl_dt,g_lower,g_upper";
pub const SWEEP_HEADER: &str = "pressure_cmh2o,drive_v,peak_flow,f0_hz,max_negative_derivative";

/// Fraction of 16-bit full scale the absolute peak is mapped to.
pub const WAV_PEAK_FRACTION: f64 = 0.9;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Input(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the whole buffer, removing the file again if the write fails.
fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), ExportError> {
    let result = fs::File::create(path).and_then(|mut f| {
        f.write_all(bytes)?;
        f.flush()
    });
    if let Err(source) = result {
        let _ = fs::remove_file(path);
        return Err(ExportError::Io {
            path: path.to_path_buf(),
            source,
        });
    }
    Ok(())
}

/// Time as fixed-point seconds (1 ns resolution), data with 10 significant digits.
pub fn waveform_csv(w: &Waveform, derivative: &[f64]) -> Result<String, ExportError> {
    let n = w.len();
    if derivative.len() != n || w.g_lower.len() != n || w.g_upper.len() != n {
        return Err(ExportError::Input(format!(
            "waveform columns are not aligned ({n} flow samples, {} derivative samples)",
            derivative.len()
        )));
    }
    let mut out = String::with_capacity(80 * (n + 1));
    out.push_str(WAVEFORM_HEADER);
    out.push('\n');
    for k in 0..n {
        writeln!(
            out,
            "{:.9},{:.9e},{:.9e},{:.9e},{:.9e}",
            w.time_at(k),
            w.u_gl[k],
            derivative[k],
            w.g_lower[k],
            w.g_upper[k]
        )
        .expect("write to String");
    }
    Ok(out)
}

pub fn export_csv(w: &Waveform, derivative: &[f64], path: &Path) -> Result<(), ExportError> {
    write_atomically(path, waveform_csv(w, derivative)?.as_bytes())
}

/// Reads a waveform CSV back. The sample rate is recovered from the time
/// column and rounded to whole hertz.
pub fn read_waveform_csv(path: &Path) -> Result<(Waveform, Vec<f64>), ExportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let format = |line: usize, message: String| ExportError::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == WAVEFORM_HEADER => {}
        other => return Err(format(1, format!("expected header `{WAVEFORM_HEADER}`, got {other:?}"))),
    }
    let mut cols: [Vec<f64>; 5] = Default::default();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(format(lineno, format!("expected 5 fields, got {}", fields.len())));
        }
        for (col, field) in cols.iter_mut().zip(fields) {
            let x: f64 = field
                .trim()
                .parse()
                .map_err(|_| format(lineno, format!("malformed number `{field}`")))?;
            if !x.is_finite() {
                return Err(format(lineno, format!("non-finite value `{field}`")));
            }
            col.push(x);
        }
    }
    let [time, u_gl, du, g_lower, g_upper] = cols;
    let n = time.len();
    if n < 3 {
        return Err(format(n + 1, format!("need at least 3 samples, got {n}")));
    }
    let span = time[n - 1] - time[0];
    if !(span > 0.0) {
        return Err(format(2, "time column is not increasing".into()));
    }
    let rate = ((n - 1) as f64 / span).round();
    let w = Waveform {
        sample_rate_hz: rate,
        t0: time[0],
        u_gl,
        g_lower,
        g_upper,
    };
    Ok((w, du))
}

/// Scales to 16-bit PCM with the absolute peak at 0.9 of full scale.
pub fn pcm16(samples: &[f64]) -> Vec<i16> {
    let peak = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 || !peak.is_finite() {
        return vec![0; samples.len()];
    }
    let scale = WAV_PEAK_FRACTION * i16::MAX as f64 / peak;
    samples
        .iter()
        .map(|x| (x * scale).round().clamp(-(i16::MAX as f64), i16::MAX as f64) as i16)
        .collect()
}

/// Canonical 44-byte-header RIFF/WAVE file, PCM mono 16-bit.
pub fn wav_bytes(samples: &[f64], sample_rate_hz: u32) -> Result<Vec<u8>, ExportError> {
    if samples.is_empty() {
        return Err(ExportError::Input("cannot write an empty WAV file".into()));
    }
    const CHANNELS: u16 = 1;
    const BITS: u16 = 16;
    let block_align = CHANNELS * BITS / 8;
    let data_len = u32::try_from(samples.len() * block_align as usize)
        .ok()
        .filter(|&n| n <= u32::MAX - 36)
        .ok_or_else(|| ExportError::Input("waveform too long for a RIFF file".into()))?;

    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&CHANNELS.to_le_bytes());
    out.extend_from_slice(&sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(sample_rate_hz * block_align as u32).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&BITS.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in pcm16(samples) {
        out.extend_from_slice(&s.to_le_bytes());
    }
    Ok(out)
}

pub fn export_wav(samples: &[f64], sample_rate_hz: u32, path: &Path) -> Result<(), ExportError> {
    write_atomically(path, &wav_bytes(samples, sample_rate_hz)?)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), |v| format!("{v:.9e}"))
}

/// Report as `key = value` lines.
pub fn report_text(report: &Report, w: &Waveform, drive: Option<(f64, f64)>) -> String {
    let mut out = String::from("# glottal source analysis\n");
    if let Some((pressure, volts)) = drive {
        writeln!(out, "pressure_cmh2o = {pressure}").unwrap();
        writeln!(out, "drive_v = {volts:.9}").unwrap();
    }
    writeln!(out, "sample_rate_hz = {}", w.sample_rate_hz).unwrap();
    writeln!(out, "samples = {}", w.len()).unwrap();
    writeln!(out, "pulse_count = {}", report.pulse_count).unwrap();
    writeln!(out, "f0_hz = {}", opt(report.f0_hz)).unwrap();
    writeln!(out, "peak_flow = {:.9e}", report.peak_flow).unwrap();
    writeln!(out, "max_negative_derivative = {:.9e}", report.max_negative_derivative.0).unwrap();
    writeln!(out, "max_negative_derivative_time_s = {:.9}", report.max_negative_derivative.1).unwrap();
    writeln!(out, "closed_phase_flatness = {:.3e}", report.closed_phase_flatness).unwrap();
    writeln!(out, "open_phase_count = {}", report.open_phases.len()).unwrap();
    writeln!(out, "wav_scaling = peak normalized to {WAV_PEAK_FRACTION} of full scale per file").unwrap();
    out
}

pub fn export_report(text: &str, path: &Path) -> Result<(), ExportError> {
    write_atomically(path, text.as_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub pressure_cmh2o: f64,
    pub drive_v: f64,
    pub peak_flow: f64,
    pub f0_hz: Option<f64>,
    pub max_negative_derivative: f64,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{:.9e},{:.9e},{},{:.9e}",
            r.pressure_cmh2o,
            r.drive_v,
            r.peak_flow,
            r.f0_hz.map_or_else(|| "nan".to_string(), |f| format!("{f:.9e}")),
            r.max_negative_derivative
        )
        .unwrap();
    }
    out
}

pub fn export_sweep(rows: &[SweepRow], path: &Path) -> Result<(), ExportError> {
    write_atomically(path, sweep_csv(rows).as_bytes())
}
