//! The complete glottal circuit: two fold stages in series across the
//! pressure-equivalent drive voltage.
//!
//! ```text
//!         lower fold               upper fold
//!   +V --[G_l]--[K_c sqrt]--+--[G_u]--[K_e square]-- 0 V
//!          \______/              \______/
//!        osc (lag 0)          osc (lag 1 ms)
//! ```
//!
//! Every element's coefficient is scaled by its fold's normalized oscillator
//! output. The circuit is purely resistive, so each sample is an independent
//! DC solve of the series string for the flow current `U_gl`.

use thiserror::Error;

use crate::elements::{ElementError, ElementKind, ResistorElement};
use crate::oscillator::OscillatorConfig;
use crate::pressure::DcVoltage;
use crate::scalar::Real;

const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("series string is empty")]
    Empty,
    #[error("drive voltage must be finite and >= 0 (got {0})")]
    Drive(f64),
    #[error("series solve did not converge; root bracketed in [{lo}, {hi}] A")]
    NoConvergence { lo: f64, hi: f64 },
    #[error("series solve failed at t = {time_s} s: {source}")]
    AtSample {
        time_s: f64,
        #[source]
        source: Box<NetworkError>,
    },
    #[error("{0} fold requires a linear element and a {1} element")]
    FoldTopology(&'static str, &'static str),
    #[error("duration must be positive and finite (got {0})")]
    Duration(f64),
    #[error("sample rate must be >= 8000 Hz (got {0})")]
    SampleRate(f64),
    #[error(transparent)]
    Element(#[from] ElementError),
}

/// Sum of element voltage drops minus the drive, and its slope in current.
fn kvl_residual<T: Real>(elements: &[ResistorElement<T>], i: T, v_drive: T) -> Result<(T, T), ElementError> {
    let mut drop = T::zero();
    let mut slope = T::zero();
    for e in elements {
        drop = drop + e.voltage(i)?;
        slope = slope + e.voltage_slope(i);
    }
    Ok((drop - v_drive, slope))
}

/// Current through a series string of elements driven by `v_drive`.
///
/// Safeguarded Newton on `f(I) = sum v_k(I) - v_drive`, which is strictly
/// increasing and continuous. The bracket starts at `[0, min_k i_k(v_drive)]`:
/// no element can carry more than it would with the full drive across it.
pub fn solve_series_current<T: Real>(
    elements: &[ResistorElement<T>],
    v_drive: T,
) -> Result<T, NetworkError> {
    if elements.is_empty() {
        return Err(NetworkError::Empty);
    }
    if !(v_drive.is_finite() && v_drive >= T::zero()) {
        return Err(NetworkError::Drive(v_drive.as_f64()));
    }
    if v_drive == T::zero() || elements.iter().any(|e| e.is_open()) {
        return Ok(T::zero());
    }

    let tolerance = T::lit(1e-10).max(T::epsilon() * T::lit(64.0)) * v_drive.max(T::one());
    let eps = T::epsilon();

    let mut lo = T::zero();
    let mut hi = elements
        .iter()
        .map(|e| e.current(v_drive))
        .fold(T::infinity(), T::min);
    // Rounding can leave f(hi) a hair negative.
    while kvl_residual(elements, hi, v_drive)?.0 < T::zero() {
        lo = hi;
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return Err(NetworkError::NoConvergence {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
    }

    let mut i = hi;
    let mut best = (T::infinity(), i);
    for _ in 0..MAX_ITERATIONS {
        let (f, slope) = kvl_residual(elements, i, v_drive)?;
        if f.abs() < best.0 {
            best = (f.abs(), i);
        }
        if f == T::zero() {
            return Ok(i);
        }
        if f < T::zero() {
            lo = i;
        } else {
            hi = i;
        }

        let newton = i - f / slope;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            lo + (hi - lo) / T::lit(2.0)
        };
        let step = (next - i).abs();
        i = next;
        if step <= eps * T::lit(4.0) * i || hi - lo <= eps * T::lit(4.0) * hi {
            break;
        }
    }

    let (f, _) = kvl_residual(elements, i, v_drive)?;
    if f.abs() < best.0 {
        best = (f.abs(), i);
    }
    if best.0 <= tolerance {
        Ok(best.1)
    } else {
        Err(NetworkError::NoConvergence {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        })
    }
}

/// One vocal fold: a linear (laminar) and a nonlinear (turbulent) element in
/// series, gated by the fold's oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldStage<T> {
    linear: ResistorElement<T>,
    nonlinear: ResistorElement<T>,
    oscillator: OscillatorConfig<T>,
}

impl<T: Real> FoldStage<T> {
    /// Lower fold: linear plus square-root element.
    pub fn lower(
        linear: ResistorElement<T>,
        compressive: ResistorElement<T>,
        oscillator: OscillatorConfig<T>,
    ) -> Result<Self, NetworkError> {
        if linear.kind() != ElementKind::Linear || compressive.kind() != ElementKind::Compressive {
            return Err(NetworkError::FoldTopology("lower", "compressive"));
        }
        Ok(Self {
            linear,
            nonlinear: compressive,
            oscillator,
        })
    }

    /// Upper fold: linear plus square-law element.
    pub fn upper(
        linear: ResistorElement<T>,
        expansive: ResistorElement<T>,
        oscillator: OscillatorConfig<T>,
    ) -> Result<Self, NetworkError> {
        if linear.kind() != ElementKind::Linear || expansive.kind() != ElementKind::Expansive {
            return Err(NetworkError::FoldTopology("upper", "expansive"));
        }
        Ok(Self {
            linear,
            nonlinear: expansive,
            oscillator,
        })
    }

    pub fn linear(&self) -> &ResistorElement<T> {
        &self.linear
    }

    pub fn nonlinear(&self) -> &ResistorElement<T> {
        &self.nonlinear
    }

    pub fn oscillator(&self) -> &OscillatorConfig<T> {
        &self.oscillator
    }

    pub fn with_oscillator(self, oscillator: OscillatorConfig<T>) -> Self {
        Self { oscillator, ..self }
    }

    /// Both elements biased by the oscillator output at `t`.
    pub fn gated_elements(&self, t: T) -> Result<(T, [ResistorElement<T>; 2]), NetworkError> {
        let bias = self.oscillator.bias_scale(t);
        Ok((bias, [self.linear.with_bias(bias)?, self.nonlinear.with_bias(bias)?]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlottalCircuit<T> {
    pub lower: FoldStage<T>,
    pub upper: FoldStage<T>,
    pub drive: DcVoltage<T>,
}

impl<T: Real> GlottalCircuit<T> {
    pub fn new(lower: FoldStage<T>, upper: FoldStage<T>, drive: DcVoltage<T>) -> Self {
        Self { lower, upper, drive }
    }

    /// Unit-gain elements, 8 ms oscillators with a 1 ms upper-fold lag.
    pub fn normal_voice(drive: DcVoltage<T>) -> Self {
        let unit = |kind| ResistorElement::new(kind, T::one()).expect("unit gain is valid");
        let lower = FoldStage::lower(
            unit(ElementKind::Linear),
            unit(ElementKind::Compressive),
            OscillatorConfig::normal_voice(T::zero()),
        )
        .expect("lower topology");
        let upper = FoldStage::upper(
            unit(ElementKind::Linear),
            unit(ElementKind::Expansive),
            OscillatorConfig::normal_voice(T::lit(1e-3)),
        )
        .expect("upper topology");
        Self::new(lower, upper, drive)
    }

    pub fn inter_fold_lag_s(&self) -> T {
        self.upper.oscillator.phase_lag_s() - self.lower.oscillator.phase_lag_s()
    }

    /// Replaces both oscillators' pulse durations.
    pub fn with_pulse_duration(mut self, pulse_duration_s: T) -> Result<Self, NetworkError> {
        let lower = self.lower.oscillator.with_pulse_duration(pulse_duration_s);
        let upper = self.upper.oscillator.with_pulse_duration(pulse_duration_s);
        match (lower, upper) {
            (Ok(l), Ok(u)) => {
                self.lower.oscillator = l;
                self.upper.oscillator = u;
                Ok(self)
            }
            _ => Err(NetworkError::Duration(pulse_duration_s.as_f64())),
        }
    }

    /// The four gated elements and the two bias values at time `t`.
    pub fn string_at(&self, t: T) -> Result<(T, T, [ResistorElement<T>; 4]), NetworkError> {
        let (g_lower, [a, b]) = self.lower.gated_elements(t)?;
        let (g_upper, [c, d]) = self.upper.gated_elements(t)?;
        Ok((g_lower, g_upper, [a, b, c, d]))
    }

    /// Flow current at a single instant.
    pub fn flow_at(&self, t: T) -> Result<T, NetworkError> {
        let (_, _, string) = self.string_at(t)?;
        solve_series_current(&string, self.drive.value())
    }
}

/// Uniformly sampled flow with the per-fold bias traces that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GlottalWaveform<T> {
    pub sample_rate_hz: T,
    pub t0: T,
    pub u_gl: Vec<T>,
    pub g_lower: Vec<T>,
    pub g_upper: Vec<T>,
}

impl<T: Real> GlottalWaveform<T> {
    pub fn len(&self) -> usize {
        self.u_gl.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_gl.is_empty()
    }

    pub fn time_at(&self, k: usize) -> T {
        self.t0 + T::from_count(k) / self.sample_rate_hz
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(|k| self.time_at(k))
    }

    /// Largest flow sample, zero for an empty or all-zero waveform.
    pub fn peak(&self) -> T {
        self.u_gl.iter().fold(T::zero(), |m, &u| m.max(u.abs()))
    }
}

fn sample_count<T: Real>(duration_s: T, sample_rate_hz: T) -> Result<usize, NetworkError> {
    if !(duration_s.is_finite() && duration_s > T::zero()) {
        return Err(NetworkError::Duration(duration_s.as_f64()));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz >= T::lit(8000.0)) {
        return Err(NetworkError::SampleRate(sample_rate_hz.as_f64()));
    }
    let n = (duration_s * sample_rate_hz).round();
    Ok(n.to_usize().unwrap_or(0).max(1))
}

/// Bias traces of both folds on the simulation grid.
pub fn conductance_traces<T: Real>(
    circuit: &GlottalCircuit<T>,
    duration_s: T,
    sample_rate_hz: T,
) -> Result<(Vec<T>, Vec<T>), NetworkError> {
    let n = sample_count(duration_s, sample_rate_hz)?;
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for k in 0..n {
        let t = T::from_count(k) / sample_rate_hz;
        lower.push(circuit.lower.oscillator.bias_scale(t));
        upper.push(circuit.upper.oscillator.bias_scale(t));
    }
    Ok((lower, upper))
}

/// Quasi-static transient run starting at `t = 0`.
pub fn simulate<T: Real>(
    circuit: &GlottalCircuit<T>,
    duration_s: T,
    sample_rate_hz: T,
) -> Result<GlottalWaveform<T>, NetworkError> {
    let n = sample_count(duration_s, sample_rate_hz)?;
    let v_drive = circuit.drive.value();
    if v_drive < T::zero() {
        return Err(NetworkError::Drive(v_drive.as_f64()));
    }
    let mut w = GlottalWaveform {
        sample_rate_hz,
        t0: T::zero(),
        u_gl: Vec::with_capacity(n),
        g_lower: Vec::with_capacity(n),
        g_upper: Vec::with_capacity(n),
    };
    for k in 0..n {
        let t = T::from_count(k) / sample_rate_hz;
        let (g_lower, g_upper, string) = circuit.string_at(t)?;
        let u = solve_series_current(&string, v_drive).map_err(|e| NetworkError::AtSample {
            time_s: t.as_f64(),
            source: Box::new(e),
        })?;
        w.u_gl.push(u);
        w.g_lower.push(g_lower);
        w.g_upper.push(g_upper);
    }
    Ok(w)
}
