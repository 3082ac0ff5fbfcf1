//! Run configuration: a sectioned key-value document (TOML syntax).
//!
//! ```text
//! [pressure]
//! cmh2o = 10.0
//!
//! [simulation]
//! duration_s = 1.0
//! sample_rate_hz = 44100
//!
//! [oscillator.lower]          # same keys under [oscillator.upper]
//! period_s = 0.008
//! pulse_duration_s = 0.008
//! rise_fraction = 0.9
//! peak_current = 1.0
//! phase_lag_s = 0.0           # upper fold defaults to 0.001
//!
//! [elements]
//! lower_linear = 1.0
//! lower_compressive = 1.0
//! upper_linear = 1.0
//! upper_expansive = 1.0
//!
//! [output]
//! dir = "glottis-out"
//! wav = false
//! ```
//!
//! Every key is optional. Unknown sections or keys are errors.

use std::path::{Path, PathBuf};

use glottis::{
    pressure_to_voltage, Circuit, Element, ElementKind, Fold, Oscillator, Pressure, Voltage,
};
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax error: {0}")]
    Syntax(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    fn invalid(key: &str, message: impl ToString) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorSettings {
    pub period_s: f64,
    pub pulse_duration_s: f64,
    pub rise_fraction: f64,
    pub peak_current: f64,
    pub phase_lag_s: f64,
}

impl OscillatorSettings {
    fn normal_voice(phase_lag_s: f64) -> Self {
        Self {
            period_s: 8e-3,
            pulse_duration_s: 8e-3,
            rise_fraction: Oscillator::DEFAULT_RISE_FRACTION,
            peak_current: 1.0,
            phase_lag_s,
        }
    }

    fn build(&self, section: &str) -> Result<Oscillator, ConfigError> {
        use glottis::OscillatorError as E;
        Oscillator::new(
            self.period_s,
            self.pulse_duration_s,
            self.rise_fraction,
            self.peak_current,
            self.phase_lag_s,
        )
        .map_err(|e| {
            let key = match e {
                E::Period(_) => "period_s",
                E::PulseDuration(_) => "pulse_duration_s",
                E::RiseFraction(_) => "rise_fraction",
                E::PeakCurrent(_) => "peak_current",
                E::PhaseLag(_) => "phase_lag_s",
            };
            ConfigError::invalid(&format!("{section}.{key}"), e)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementGains {
    pub lower_linear: f64,
    pub lower_compressive: f64,
    pub upper_linear: f64,
    pub upper_expansive: f64,
}

impl Default for ElementGains {
    fn default() -> Self {
        Self {
            lower_linear: 1.0,
            lower_compressive: 1.0,
            upper_linear: 1.0,
            upper_expansive: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub wav: bool,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("glottis-out"),
            wav: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pressure_cmh2o: f64,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
    pub lower: OscillatorSettings,
    pub upper: OscillatorSettings,
    pub gains: ElementGains,
    pub output: OutputSettings,
}

impl Default for RunConfig {
    /// The normal-voice scenario: 10 cmH2O, 125 Hz folds 1 ms apart, 1 s at
    /// 44.1 kHz.
    fn default() -> Self {
        Self {
            pressure_cmh2o: 10.0,
            duration_s: 1.0,
            sample_rate_hz: 44_100,
            lower: OscillatorSettings::normal_voice(0.0),
            upper: OscillatorSettings::normal_voice(1e-3),
            gains: ElementGains::default(),
            output: OutputSettings::default(),
        }
    }
}

const SECTIONS: &[&str] = &["pressure", "simulation", "oscillator", "elements", "output"];
const OSCILLATOR_KEYS: &[&str] = &[
    "period_s",
    "pulse_duration_s",
    "rise_fraction",
    "peak_current",
    "phase_lag_s",
];

fn section<'a>(root: &'a Table, name: &str) -> Result<Option<&'a Table>, ConfigError> {
    match root.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(ConfigError::invalid(name, "expected a [section]")),
    }
}

fn reject_unknown(table: &Table, prefix: &str, allowed: &[&str]) -> Result<(), ConfigError> {
    match table.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ConfigError::UnknownKey(format!("{prefix}.{k}"))),
        None => Ok(()),
    }
}

fn number(table: &Table, prefix: &str, key: &str, slot: &mut f64) -> Result<(), ConfigError> {
    let full = format!("{prefix}.{key}");
    match table.get(key) {
        None => Ok(()),
        Some(Value::Float(x)) if x.is_finite() => {
            *slot = *x;
            Ok(())
        }
        Some(Value::Integer(n)) => {
            *slot = *n as f64;
            Ok(())
        }
        Some(other) => Err(ConfigError::invalid(&full, format!("expected a finite number, got {other}"))),
    }
}

fn oscillator_section(
    root: &Table,
    fold: &str,
    slot: &mut OscillatorSettings,
) -> Result<(), ConfigError> {
    let Some(osc) = section(root, "oscillator")? else {
        return Ok(());
    };
    let prefix = format!("oscillator.{fold}");
    let Some(table) = section(osc, fold).map_err(|_| ConfigError::invalid(&prefix, "expected a [section]"))? else {
        return Ok(());
    };
    reject_unknown(table, &prefix, OSCILLATOR_KEYS)?;
    number(table, &prefix, "period_s", &mut slot.period_s)?;
    number(table, &prefix, "pulse_duration_s", &mut slot.pulse_duration_s)?;
    number(table, &prefix, "rise_fraction", &mut slot.rise_fraction)?;
    number(table, &prefix, "peak_current", &mut slot.peak_current)?;
    number(table, &prefix, "phase_lag_s", &mut slot.phase_lag_s)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg = parse_config_unvalidated(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses a document, checking syntax, keys, and value types only.
///
/// For callers that apply overrides first; run [`RunConfig::validate`] after.
pub fn parse_config_unvalidated(text: &str) -> Result<RunConfig, ConfigError> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    if let Some(k) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(ConfigError::UnknownKey(k.clone()));
    }
    let mut cfg = RunConfig::default();

    if let Some(t) = section(&root, "pressure")? {
        reject_unknown(t, "pressure", &["cmh2o"])?;
        number(t, "pressure", "cmh2o", &mut cfg.pressure_cmh2o)?;
    }

    if let Some(t) = section(&root, "simulation")? {
        reject_unknown(t, "simulation", &["duration_s", "sample_rate_hz"])?;
        number(t, "simulation", "duration_s", &mut cfg.duration_s)?;
        let mut rate = cfg.sample_rate_hz as f64;
        number(t, "simulation", "sample_rate_hz", &mut rate)?;
        if rate.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&rate) {
            return Err(ConfigError::invalid(
                "simulation.sample_rate_hz",
                format!("must be a whole number of hertz (got {rate})"),
            ));
        }
        cfg.sample_rate_hz = rate as u32;
    }

    if let Some(osc) = section(&root, "oscillator")? {
        reject_unknown(osc, "oscillator", &["lower", "upper"])?;
    }
    oscillator_section(&root, "lower", &mut cfg.lower)?;
    oscillator_section(&root, "upper", &mut cfg.upper)?;

    if let Some(t) = section(&root, "elements")? {
        reject_unknown(
            t,
            "elements",
            &["lower_linear", "lower_compressive", "upper_linear", "upper_expansive"],
        )?;
        let g = &mut cfg.gains;
        number(t, "elements", "lower_linear", &mut g.lower_linear)?;
        number(t, "elements", "lower_compressive", &mut g.lower_compressive)?;
        number(t, "elements", "upper_linear", &mut g.upper_linear)?;
        number(t, "elements", "upper_expansive", &mut g.upper_expansive)?;
    }

    if let Some(t) = section(&root, "output")? {
        reject_unknown(t, "output", &["dir", "wav"])?;
        match t.get("dir") {
            None => {}
            Some(Value::String(s)) => cfg.output.dir = PathBuf::from(s),
            Some(other) => return Err(ConfigError::invalid("output.dir", format!("expected a string, got {other}"))),
        }
        match t.get("wav") {
            None => {}
            Some(Value::Boolean(b)) => cfg.output.wav = *b,
            Some(other) => return Err(ConfigError::invalid("output.wav", format!("expected true or false, got {other}"))),
        }
    }

    Ok(cfg)
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    parse_config(&read(path)?)
}

pub fn load_config_unvalidated(path: &Path) -> Result<RunConfig, ConfigError> {
    parse_config_unvalidated(&read(path)?)
}

impl RunConfig {
    pub fn pressure(&self) -> Result<Pressure, ConfigError> {
        Pressure::new(self.pressure_cmh2o).map_err(|e| ConfigError::invalid("pressure.cmh2o", e))
    }

    pub fn drive(&self) -> Result<Voltage, ConfigError> {
        pressure_to_voltage(self.pressure()?).map_err(|e| ConfigError::invalid("pressure.cmh2o", e))
    }

    /// Checks every invariant the circuit and simulation grid rely on.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.drive()?;
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(ConfigError::invalid(
                "simulation.duration_s",
                format!("must be > 0 (got {})", self.duration_s),
            ));
        }
        if self.sample_rate_hz < 8000 {
            return Err(ConfigError::invalid(
                "simulation.sample_rate_hz",
                format!("must be >= 8000 (got {})", self.sample_rate_hz),
            ));
        }
        if (self.duration_s * self.sample_rate_hz as f64).round() < 3.0 {
            return Err(ConfigError::invalid(
                "simulation.duration_s",
                "must span at least 3 samples",
            ));
        }
        self.circuit().map(|_| ())
    }

    pub fn circuit(&self) -> Result<Circuit, ConfigError> {
        let lower_osc = self.lower.build("oscillator.lower")?;
        let upper_osc = self.upper.build("oscillator.upper")?;
        let gain = |key: &str, kind, value: f64| {
            Element::new(kind, value).map_err(|e| ConfigError::invalid(&format!("elements.{key}"), e))
        };
        let g = &self.gains;
        let lower = Fold::lower(
            gain("lower_linear", ElementKind::Linear, g.lower_linear)?,
            gain("lower_compressive", ElementKind::Compressive, g.lower_compressive)?,
            lower_osc,
        )
        .map_err(|e| ConfigError::invalid("elements", e))?;
        let upper = Fold::upper(
            gain("upper_linear", ElementKind::Linear, g.upper_linear)?,
            gain("upper_expansive", ElementKind::Expansive, g.upper_expansive)?,
            upper_osc,
        )
        .map_err(|e| ConfigError::invalid("elements", e))?;
        Ok(Circuit::new(lower, upper, self.drive()?))
    }

    /// Renders the configuration as a document `parse_config` accepts.
    pub fn to_config_text(&self) -> String {
        let osc = |name: &str, o: &OscillatorSettings| {
            format!(
                "[oscillator.{name}]\nperiod_s = {:?}\npulse_duration_s = {:?}\nrise_fraction = {:?}\npeak_current = {:?}\nphase_lag_s = {:?}\n",
                o.period_s, o.pulse_duration_s, o.rise_fraction, o.peak_current, o.phase_lag_s
            )
        };
        let dir = Value::String(self.output.dir.to_string_lossy().into_owned());
        format!(
            "[pressure]\ncmh2o = {:?}\n\n\
             [simulation]\nduration_s = {:?}\nsample_rate_hz = {}\n\n\
             {}\n{}\n\
             [elements]\nlower_linear = {:?}\nlower_compressive = {:?}\nupper_linear = {:?}\nupper_expansive = {:?}\n\n\
             [output]\ndir = {}\nwav = {}\n",
            self.pressure_cmh2o,
            self.duration_s,
            self.sample_rate_hz,
            osc("lower", &self.lower),
            osc("upper", &self.upper),
            self.gains.lower_linear,
            self.gains.lower_compressive,
            self.gains.upper_linear,
            self.gains.upper_expansive,
            dir,
            self.output.wav,
        )
    }
}

/// Pressure sweep over `[start, stop]` in `step` increments.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub start_cmh2o: f64,
    pub stop_cmh2o: f64,
    pub step_cmh2o: f64,
    pub base: RunConfig,
}

impl SweepConfig {
    /// 7 to 10 cmH2O in 1 cmH2O steps.
    pub fn normal_voice(base: RunConfig) -> Self {
        Self {
            start_cmh2o: 7.0,
            stop_cmh2o: 10.0,
            step_cmh2o: 1.0,
            base,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.step_cmh2o.is_finite() && self.step_cmh2o > 0.0) {
            return Err(ConfigError::invalid("sweep.step", format!("must be > 0 (got {})", self.step_cmh2o)));
        }
        if !(self.start_cmh2o <= self.stop_cmh2o) {
            return Err(ConfigError::invalid(
                "sweep.from",
                format!("must not exceed sweep.to ({} > {})", self.start_cmh2o, self.stop_cmh2o),
            ));
        }
        for p in self.pressures() {
            RunConfig {
                pressure_cmh2o: p,
                ..self.base.clone()
            }
            .validate()?;
        }
        Ok(())
    }

    /// Sweep points; a step wider than the range yields only the start.
    pub fn pressures(&self) -> Vec<f64> {
        let span = (self.stop_cmh2o - self.start_cmh2o) / self.step_cmh2o;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| self.start_cmh2o + k as f64 * self.step_cmh2o)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn err(text: &str) -> String {
        parse_config(text).unwrap_err().to_string()
    }

    #[test]
    fn empty_document_is_normal_voice() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.pressure_cmh2o, 10.0);
        assert_eq!(cfg.lower.period_s, 8e-3);
        assert_eq!(cfg.upper.phase_lag_s, 1e-3);
        assert_eq!(cfg.sample_rate_hz, 44_100);
        assert_eq!(cfg.duration_s, 1.0);
        assert_eq!(cfg.gains, ElementGains::default());
    }

    #[test]
    fn overrides_apply() {
        let cfg = parse_config(
            "[pressure]\ncmh2o = 8\n[oscillator.upper]\nphase_lag_s = 0.002\n[output]\nwav = true\ndir = \"x\"\n",
        )
        .unwrap();
        assert_eq!(cfg.pressure_cmh2o, 8.0);
        assert_eq!(cfg.upper.phase_lag_s, 2e-3);
        assert_eq!(cfg.lower.phase_lag_s, 0.0);
        assert!(cfg.output.wav);
        assert_eq!(cfg.output.dir, PathBuf::from("x"));
    }

    #[test]
    fn low_pressure_cites_intercept() {
        let msg = err("[pressure]\ncmh2o = 5.0\n");
        assert!(msg.contains("pressure.cmh2o"), "{msg}");
        assert!(msg.contains("below voicing-onset intercept"), "{msg}");
    }

    #[test]
    fn rise_fraction_cites_bound() {
        let msg = err("[oscillator.lower]\nrise_fraction = 0.3\n");
        assert!(msg.contains("oscillator.lower.rise_fraction"), "{msg}");
        assert!(msg.contains("0.5"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_named() {
        assert!(err("[pressure]\ncmH2O = 9\n").contains("pressure.cmH2O"));
        assert!(err("[vocal_tract]\nlength = 1\n").contains("vocal_tract"));
        assert!(err("[oscillator.middle]\nperiod_s = 1\n").contains("oscillator.middle"));
        assert!(err("[elements]\nlower_square = 1\n").contains("elements.lower_square"));
    }

    #[test]
    fn malformed_values() {
        assert!(err("[pressure]\ncmh2o = \"ten\"\n").contains("pressure.cmh2o"));
        assert!(err("[simulation]\nsample_rate_hz = 44100.5\n").contains("simulation.sample_rate_hz"));
        assert!(err("[simulation]\nduration_s = 0\n").contains("simulation.duration_s"));
        assert!(err("[simulation]\nsample_rate_hz = 4000\n").contains("8000"));
        assert!(err("[elements]\nupper_linear = -1\n").contains("elements.upper_linear"));
        assert!(err("[output]\nwav = 1\n").contains("output.wav"));
        assert!(err("[pressure\n").starts_with("config syntax error"));
    }

    #[test]
    fn sweep_points() {
        let s = |a, b, c| SweepConfig {
            start_cmh2o: a,
            stop_cmh2o: b,
            step_cmh2o: c,
            base: RunConfig::default(),
        };
        assert_eq!(s(7.0, 10.0, 1.0).pressures(), vec![7.0, 8.0, 9.0, 10.0]);
        assert_eq!(s(8.0, 8.0, 1.0).pressures(), vec![8.0]);
        assert_eq!(s(7.0, 8.0, 5.0).pressures(), vec![7.0]);
        assert_eq!(s(7.0, 7.3, 0.1).pressures().len(), 4);
        assert!(s(9.0, 7.0, 1.0).validate().is_err());
        assert!(s(7.0, 9.0, 0.0).validate().is_err());
        assert!(s(5.0, 9.0, 1.0).validate().is_err());
    }

    fn settings() -> impl Strategy<Value = OscillatorSettings> {
        (1e-3f64..2e-2, 0.05f64..=1.0, 0.51f64..0.99, 0.0f64..5.0, 0.0f64..5e-3).prop_map(
            |(period_s, frac, rise_fraction, peak_current, phase_lag_s)| OscillatorSettings {
                period_s,
                pulse_duration_s: period_s * frac,
                rise_fraction,
                peak_current,
                phase_lag_s,
            },
        )
    }

    proptest! {
        #[test]
        fn text_round_trip(
            pressure in 5.94f64..15.0,
            duration in 0.01f64..3.0,
            rate in 8000u32..96_000,
            lower in settings(),
            upper in settings(),
            gains in prop::array::uniform4(0.0f64..1e3),
            wav in any::<bool>(),
            dir in "[a-z][a-z0-9_/ \\\\\"]{0,12}",
        ) {
            let cfg = RunConfig {
                pressure_cmh2o: pressure,
                duration_s: duration,
                sample_rate_hz: rate,
                lower,
                upper,
                gains: ElementGains {
                    lower_linear: gains[0],
                    lower_compressive: gains[1],
                    upper_linear: gains[2],
                    upper_expansive: gains[3],
                },
                output: OutputSettings { dir: PathBuf::from(dir), wav },
            };
            let text = cfg.to_config_text();
            let back = parse_config(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
