//! Flow derivative, fundamental frequency, and open/closed phase analysis.

use thiserror::Error;

use crate::network::GlottalWaveform;
use crate::scalar::Real;

/// Relative flow level below which the glottis counts as closed.
pub const CLOSURE_THRESHOLD: f64 = 1e-6;
/// Pulse peaks must exceed this fraction of the global peak.
pub const PEAK_FRACTION: f64 = 0.5;
/// Minimum spacing between accepted pulse peaks, seconds.
pub const MIN_PEAK_SPACING_S: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("derivative needs at least 3 samples (got {0})")]
    TooShort(usize),
    #[error("insufficient pulses: found {0}, need at least 2")]
    InsufficientPulses(usize),
    #[error("waveform is empty")]
    Empty,
}

/// Half-open time interval `[start, end)` with the sample range it spans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub start: T,
    pub end: T,
    pub first_sample: usize,
    pub end_sample: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSegmentation<T> {
    pub open: Vec<Interval<T>>,
    pub closed: Vec<Interval<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport<T> {
    pub f0_hz: Option<T>,
    /// Most negative `dU_gl/dt` and the time it occurs.
    pub max_negative_derivative: (T, T),
    pub open_phases: Vec<(T, T)>,
    pub closed_phase_flatness: T,
    pub pulse_count: usize,
    pub peak_flow: T,
}

/// Central differences inside, one-sided differences at both ends.
pub fn derivative_of<T: Real>(u: &[T], sample_rate_hz: T) -> Result<Vec<T>, AnalysisError> {
    let n = u.len();
    if n < 3 {
        return Err(AnalysisError::TooShort(n));
    }
    let half = sample_rate_hz / T::lit(2.0);
    let mut d = Vec::with_capacity(n);
    d.push((u[1] - u[0]) * sample_rate_hz);
    d.extend(u.windows(3).map(|w| (w[2] - w[0]) * half));
    d.push((u[n - 1] - u[n - 2]) * sample_rate_hz);
    Ok(d)
}

pub fn derivative<T: Real>(w: &GlottalWaveform<T>) -> Result<Vec<T>, AnalysisError> {
    derivative_of(&w.u_gl, w.sample_rate_hz)
}

/// Indices of pulse peaks: local maxima above half the global peak, at
/// least 1 ms apart. Within a 1 ms cluster the largest wins.
pub fn pulse_peaks<T: Real>(u: &[T], sample_rate_hz: T) -> Vec<usize> {
    let peak = u.iter().fold(T::zero(), |m, &x| m.max(x));
    if peak <= T::zero() || u.len() < 3 {
        return Vec::new();
    }
    let floor = T::lit(PEAK_FRACTION) * peak;
    let min_gap = (T::lit(MIN_PEAK_SPACING_S) * sample_rate_hz)
        .ceil()
        .to_usize()
        .unwrap_or(1);
    let mut peaks: Vec<usize> = Vec::new();
    for k in 1..u.len() - 1 {
        if !(u[k] > floor && u[k] > u[k - 1] && u[k] >= u[k + 1]) {
            continue;
        }
        match peaks.last_mut() {
            Some(last) if k - *last < min_gap => {
                if u[k] > u[*last] {
                    *last = k;
                }
            }
            _ => peaks.push(k),
        }
    }
    peaks
}

fn median<T: Real>(mut xs: Vec<T>) -> T {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite intervals"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / T::lit(2.0)
    }
}

/// F0 as the reciprocal of the median inter-peak interval.
pub fn estimate_f0_of<T: Real>(u: &[T], sample_rate_hz: T) -> Result<T, AnalysisError> {
    let peaks = pulse_peaks(u, sample_rate_hz);
    if peaks.len() < 2 {
        return Err(AnalysisError::InsufficientPulses(peaks.len()));
    }
    let intervals = peaks
        .windows(2)
        .map(|p| T::from_count(p[1] - p[0]) / sample_rate_hz)
        .collect();
    Ok(median(intervals).recip())
}

pub fn estimate_f0<T: Real>(w: &GlottalWaveform<T>) -> Result<T, AnalysisError> {
    estimate_f0_of(&w.u_gl, w.sample_rate_hz)
}

/// Splits the waveform into maximal open runs (`u > 1e-6 * peak`) and the
/// closed runs between them. Together they tile `[t0, t0 + n / rate)`.
pub fn detect_phases<T: Real>(w: &GlottalWaveform<T>) -> Result<PhaseSegmentation<T>, AnalysisError> {
    if w.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let peak = w.peak();
    let threshold = T::lit(CLOSURE_THRESHOLD) * peak;
    let is_open = |u: T| peak > T::zero() && u.abs() > threshold;

    let mut seg = PhaseSegmentation {
        open: Vec::new(),
        closed: Vec::new(),
    };
    let mut start = 0;
    let mut state = is_open(w.u_gl[0]);
    for k in 1..=w.len() {
        let next = k < w.len() && is_open(w.u_gl[k]);
        if k == w.len() || next != state {
            let iv = Interval {
                start: w.time_at(start),
                end: w.time_at(k),
                first_sample: start,
                end_sample: k,
            };
            if state {
                seg.open.push(iv);
            } else {
                seg.closed.push(iv);
            }
            start = k;
            state = next;
        }
    }
    Ok(seg)
}

/// Lag in samples, within `[-max_lag, max_lag]`, maximizing the circular
/// cross-correlation `sum_k a[k] * b[(k + lag) mod n]`.
///
/// A positive result means `b` trails `a`.
pub fn circular_xcorr_lag<T: Real>(a: &[T], b: &[T], max_lag: usize) -> Option<isize> {
    let n = a.len();
    if n == 0 || b.len() != n {
        return None;
    }
    let max_lag = max_lag.min(n - 1) as isize;
    let mut best: Option<(T, isize)> = None;
    for lag in -max_lag..=max_lag {
        let shift = lag.rem_euclid(n as isize) as usize;
        let score = a
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, &x)| acc + x * b[(k + shift) % n]);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, lag));
        }
    }
    best.map(|(_, lag)| lag)
}

pub fn report<T: Real>(w: &GlottalWaveform<T>) -> Result<AnalysisReport<T>, AnalysisError> {
    let d = derivative(w)?;
    let (k_min, d_min) = d
        .iter()
        .enumerate()
        .fold((0, T::infinity()), |(km, dm), (k, &x)| if x < dm { (k, x) } else { (km, dm) });
    let phases = detect_phases(w)?;
    let peak = w.peak();
    let closed_max = phases
        .closed
        .iter()
        .flat_map(|iv| w.u_gl[iv.first_sample..iv.end_sample].iter())
        .fold(T::zero(), |m, &u| m.max(u.abs()));
    let flatness = if peak > T::zero() { closed_max / peak } else { T::zero() };
    let pulse_count = pulse_peaks(&w.u_gl, w.sample_rate_hz).len();

    Ok(AnalysisReport {
        f0_hz: estimate_f0(w).ok(),
        max_negative_derivative: (d_min, w.time_at(k_min)),
        open_phases: phases.open.iter().map(|iv| (iv.start, iv.end)).collect(),
        closed_phase_flatness: flatness,
        pulse_count,
        peak_flow: peak,
    })
}
