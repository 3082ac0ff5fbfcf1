use std::fs;
use std::path::Path;
use std::process::Command;

use glottis_cli::export::{self, SWEEP_HEADER, WAVEFORM_HEADER};
use glottis_cli::{run_analyze, run_simulate, run_sweep, CliError, RunConfig, SweepConfig};

fn config_in(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.output.dir = dir.to_path_buf();
    cfg
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_glottis"))
}

#[test]
fn default_simulation_writes_one_row_per_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_simulate(&config_in(tmp.path())).unwrap();
    let csv = fs::read_to_string(tmp.path().join("waveform.csv")).unwrap();
    assert_eq!(csv.lines().count(), 44_101);
    assert_eq!(csv.lines().next().unwrap(), WAVEFORM_HEADER);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.000000000,"));
    let f0 = out.report.f0_hz.unwrap();
    assert!((f0 - 125.0).abs() <= 1.0);
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert!(report.contains("pulse_count = 125"));
    assert!(!tmp.path().join("u_gl.wav").exists());
}

#[test]
fn zero_duration_fails_before_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("never");
    let mut cfg = config_in(&dir);
    cfg.duration_s = 0.0;
    let err = run_simulate(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(!dir.exists());
}

#[test]
fn intercept_pressure_has_no_pulses() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config_in(tmp.path());
    cfg.pressure_cmh2o = 5.94;
    cfg.duration_s = 0.1;
    let out = run_simulate(&cfg).unwrap();
    assert_eq!(out.report.pulse_count, 0);
    assert!(out.report.f0_hz.is_none());
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert!(report.contains("f0_hz = none"));
}

#[test]
fn csv_round_trips_at_file_precision() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config_in(tmp.path());
    cfg.duration_s = 0.05;
    let out = run_simulate(&cfg).unwrap();
    let (w, d) = export::read_waveform_csv(&tmp.path().join("waveform.csv")).unwrap();
    assert_eq!(w.sample_rate_hz, 44_100.0);
    assert_eq!(w.len(), out.waveform.len());
    // The file keeps ten significant digits; compare against the same rounding.
    let nine = |x: f64| format!("{x:.9e}").parse::<f64>().unwrap();
    for k in 0..w.len() {
        assert_eq!(nine(w.u_gl[k]), nine(out.waveform.u_gl[k]));
        assert_eq!(nine(d[k]), nine(out.derivative[k]));
        assert_eq!(nine(w.g_lower[k]), nine(out.waveform.g_lower[k]));
        assert_eq!(nine(w.g_upper[k]), nine(out.waveform.g_upper[k]));
        assert!((w.time_at(k) - out.waveform.time_at(k)).abs() < 1e-9);
    }
}

#[test]
fn analyze_reproduces_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_simulate(&config_in(tmp.path())).unwrap();
    let (again, text) = run_analyze(&tmp.path().join("waveform.csv")).unwrap();
    assert_eq!(again.pulse_count, out.report.pulse_count);
    assert_eq!(again.f0_hz, out.report.f0_hz);
    assert!(text.contains("f0_hz"));
}

#[test]
fn analyze_rejects_bad_files() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.csv");
    fs::write(&path, "a,b\n1,2\n").unwrap();
    assert!(matches!(run_analyze(&path), Err(CliError::Export(_))));
    fs::write(&path, format!("{WAVEFORM_HEADER}\n0,1,2,3,x\n")).unwrap();
    let err = run_analyze(&path).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
}

#[test]
fn wav_files_parse_with_independent_reader() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config_in(tmp.path());
    cfg.output.wav = true;
    let out = run_simulate(&cfg).unwrap();
    for name in ["u_gl.wav", "du_gl_dt.wav"] {
        let mut r = hound::WavReader::open(tmp.path().join(name)).unwrap();
        let spec = r.spec();
        assert_eq!(spec.channels, 1);
        assert_eq!(spec.sample_rate, 44_100);
        assert_eq!(spec.bits_per_sample, 16);
        assert_eq!(spec.sample_format, hound::SampleFormat::Int);
        let samples: Vec<i16> = r.samples::<i16>().map(Result::unwrap).collect();
        assert_eq!(samples.len(), out.waveform.len());
        let peak = samples.iter().map(|s| s.unsigned_abs()).max().unwrap();
        assert_eq!(peak, 29_490);
    }
    let bytes = fs::read(tmp.path().join("u_gl.wav")).unwrap();
    assert_eq!(u32::from_le_bytes(bytes[40..44].try_into().unwrap()), 88_200);
}

#[test]
fn silent_wav_is_all_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("z.wav");
    export::export_wav(&vec![0.0; 100], 8000, &path).unwrap();
    let mut r = hound::WavReader::open(&path).unwrap();
    assert!(r.samples::<i16>().all(|s| s.unwrap() == 0));
}

#[test]
fn sweep_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let mut base = config_in(tmp.path());
    base.duration_s = 0.1;
    let (rows, path) = run_sweep(&SweepConfig::normal_voice(base.clone())).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|r| r[0].pressure_cmh2o < r[1].pressure_cmh2o));
    assert!(rows.windows(2).all(|r| r[0].peak_flow <= r[1].peak_flow));
    assert!(rows.iter().all(|r| r.f0_hz == rows[0].f0_hz));
    let text = fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().next().unwrap(), SWEEP_HEADER);
    assert_eq!(text.lines().count(), 5);

    let single = |a, b, c| SweepConfig {
        start_cmh2o: a,
        stop_cmh2o: b,
        step_cmh2o: c,
        base: base.clone(),
    };
    assert_eq!(run_sweep(&single(8.0, 8.0, 1.0)).unwrap().0.len(), 1);
    let wide = run_sweep(&single(7.0, 9.0, 5.0)).unwrap().0;
    assert_eq!(wide.len(), 1);
    assert_eq!(wide[0].pressure_cmh2o, 7.0);
}

#[test]
fn failed_sweep_leaves_no_table() {
    let tmp = tempfile::tempdir().unwrap();
    let mut base = config_in(tmp.path());
    base.duration_s = 0.05;
    run_sweep(&SweepConfig::normal_voice(base.clone())).unwrap();
    let path = tmp.path().join("sweep.csv");
    assert!(path.exists());
    let bad = SweepConfig {
        start_cmh2o: 5.0,
        stop_cmh2o: 8.0,
        step_cmh2o: 1.0,
        base,
    };
    assert!(run_sweep(&bad).is_err());
    assert!(path.exists(), "validation failure should not touch earlier output");
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("run.toml");
    fs::write(&cfg_path, "[pressure]\ncmh2o = 5.0\n").unwrap();
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("below voicing-onset intercept"));

    // Flags win over the file.
    let ok = bin()
        .args(["simulate", "--config"])
        .arg(&cfg_path)
        .args(["--pressure", "9", "--duration", "0.05", "--wav", "--out"])
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(tmp.path().join("o/u_gl.wav").exists());

    let missing = bin().args(["analyze", "--csv"]).arg(tmp.path().join("nope.csv")).output().unwrap();
    assert_eq!(missing.status.code(), Some(4));

    let analyzed = bin().args(["analyze", "--csv"]).arg(tmp.path().join("o/waveform.csv")).output().unwrap();
    assert_eq!(analyzed.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&analyzed.stdout).contains("pulse_count"));

    let sweep = bin()
        .args(["sweep", "--from", "7", "--to", "8", "--step", "0.5", "--out"])
        .arg(tmp.path().join("s"))
        .output()
        .unwrap();
    assert_eq!(sweep.status.code(), Some(0));
    let table = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
}
