//! Relaxation-oscillator pulse generator.
//!
//! Each vocal fold is gated by an ideal sawtooth current source: a slow
//! linear charge from zero to `peak_current`, a fast linear discharge back to
//! zero, then silence until the next period. The fold's phase lag delays the
//! whole waveform; before the lag has elapsed the output is zero.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscillatorError {
    #[error("period_s must be positive and finite (got {0})")]
    Period(f64),
    #[error("pulse_duration_s must satisfy 0 < pulse_duration_s <= period_s (got {0})")]
    PulseDuration(f64),
    #[error("rise_fraction must satisfy 0.5 < rise_fraction < 1 (got {0})")]
    RiseFraction(f64),
    #[error("peak_current must be finite and >= 0 (got {0})")]
    PeakCurrent(f64),
    #[error("phase_lag_s must be finite and >= 0 (got {0})")]
    PhaseLag(f64),
}

/// Sawtooth pulse generator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorConfig<T> {
    period_s: T,
    pulse_duration_s: T,
    rise_fraction: T,
    peak_current: T,
    phase_lag_s: T,
}

/// Where the oscillator sits within its cycle at some instant.
///
/// The position is normalized to `[0, 1]` within the segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OscillatorPhase<T> {
    Closed,
    Rising(T),
    Falling(T),
}

impl<T> OscillatorPhase<T> {
    pub fn is_closed(&self) -> bool {
        matches!(self, OscillatorPhase::Closed)
    }

    pub fn is_falling(&self) -> bool {
        matches!(self, OscillatorPhase::Falling(_))
    }
}

impl<T: Real> OscillatorConfig<T> {
    /// Default rise fraction; the charge segment dominates the pulse.
    pub const DEFAULT_RISE_FRACTION: f64 = 0.9;

    /// A peak current of zero is accepted and yields a permanently closed fold.
    pub fn new(
        period_s: T,
        pulse_duration_s: T,
        rise_fraction: T,
        peak_current: T,
        phase_lag_s: T,
    ) -> Result<Self, OscillatorError> {
        if !(period_s.is_finite() && period_s > T::zero()) {
            return Err(OscillatorError::Period(period_s.as_f64()));
        }
        if !(pulse_duration_s > T::zero() && pulse_duration_s <= period_s) {
            return Err(OscillatorError::PulseDuration(pulse_duration_s.as_f64()));
        }
        if !(rise_fraction > T::lit(0.5) && rise_fraction < T::one()) {
            return Err(OscillatorError::RiseFraction(rise_fraction.as_f64()));
        }
        if !(peak_current.is_finite() && peak_current >= T::zero()) {
            return Err(OscillatorError::PeakCurrent(peak_current.as_f64()));
        }
        if !(phase_lag_s.is_finite() && phase_lag_s >= T::zero()) {
            return Err(OscillatorError::PhaseLag(phase_lag_s.as_f64()));
        }
        Ok(Self {
            period_s,
            pulse_duration_s,
            rise_fraction,
            peak_current,
            phase_lag_s,
        })
    }

    /// 8 ms period and pulse (125 Hz), 0.9 rise fraction, unit peak.
    pub fn normal_voice(phase_lag_s: T) -> Self {
        Self::new(
            T::lit(8e-3),
            T::lit(8e-3),
            T::lit(Self::DEFAULT_RISE_FRACTION),
            T::one(),
            phase_lag_s,
        )
        .expect("normal-voice oscillator parameters are valid")
    }

    pub fn period_s(&self) -> T {
        self.period_s
    }

    pub fn pulse_duration_s(&self) -> T {
        self.pulse_duration_s
    }

    pub fn rise_fraction(&self) -> T {
        self.rise_fraction
    }

    pub fn peak_current(&self) -> T {
        self.peak_current
    }

    pub fn phase_lag_s(&self) -> T {
        self.phase_lag_s
    }

    pub fn frequency_hz(&self) -> T {
        self.period_s.recip()
    }

    pub fn rise_duration_s(&self) -> T {
        self.rise_fraction * self.pulse_duration_s
    }

    pub fn fall_duration_s(&self) -> T {
        self.pulse_duration_s - self.rise_duration_s()
    }

    pub fn with_phase_lag(self, phase_lag_s: T) -> Result<Self, OscillatorError> {
        Self::new(
            self.period_s,
            self.pulse_duration_s,
            self.rise_fraction,
            self.peak_current,
            phase_lag_s,
        )
    }

    pub fn with_pulse_duration(self, pulse_duration_s: T) -> Result<Self, OscillatorError> {
        Self::new(
            self.period_s,
            pulse_duration_s,
            self.rise_fraction,
            self.peak_current,
            self.phase_lag_s,
        )
    }

    pub fn with_peak_current(self, peak_current: T) -> Result<Self, OscillatorError> {
        Self::new(
            self.period_s,
            self.pulse_duration_s,
            self.rise_fraction,
            peak_current,
            self.phase_lag_s,
        )
    }

    /// Time since the start of the current cycle, or `None` before the lag.
    fn cycle_offset(&self, t: T) -> Option<T> {
        if !(t >= self.phase_lag_s) {
            return None;
        }
        Some((t - self.phase_lag_s) % self.period_s)
    }

    /// Output current at time `t`.
    pub fn sample(&self, t: T) -> T {
        let Some(tau) = self.cycle_offset(t) else {
            return T::zero();
        };
        // Offsets within rounding of either pulse edge are the zero crossing.
        let slack = T::epsilon() * T::lit(16.0) * (t.abs() + self.period_s);
        if tau <= slack || tau >= self.pulse_duration_s - slack {
            return T::zero();
        }
        let rise = self.rise_duration_s();
        if tau < rise {
            self.peak_current * (tau / rise)
        } else {
            let fall = self.pulse_duration_s - rise;
            let out = self.peak_current * (T::one() - (tau - rise) / fall);
            out.max(T::zero())
        }
    }

    /// Output normalized by the peak current, in `[0, 1]`.
    ///
    /// A silent oscillator (`peak_current == 0`) reports zero everywhere.
    pub fn bias_scale(&self, t: T) -> T {
        if self.peak_current == T::zero() {
            return T::zero();
        }
        (self.sample(t) / self.peak_current).min(T::one())
    }

    pub fn phase(&self, t: T) -> OscillatorPhase<T> {
        if self.sample(t) == T::zero() {
            return OscillatorPhase::Closed;
        }
        let tau = self.cycle_offset(t).unwrap_or_else(T::zero);
        let rise = self.rise_duration_s();
        if tau < rise {
            OscillatorPhase::Rising(tau / rise)
        } else {
            OscillatorPhase::Falling((tau - rise) / self.fall_duration_s())
        }
    }

    /// Sorted, disjoint intervals within `[t0, t1]` where the output is positive.
    ///
    /// Consecutive pulses are reported separately even when they touch.
    pub fn open_intervals(&self, t0: T, t1: T) -> Vec<(T, T)> {
        let mut out = Vec::new();
        if !(t0 < t1) || self.peak_current == T::zero() {
            return out;
        }
        let first = ((t0 - self.phase_lag_s) / self.period_s).floor().max(T::zero());
        let mut k = first;
        loop {
            let start = self.phase_lag_s + k * self.period_s;
            if start >= t1 {
                break;
            }
            let end = start + self.pulse_duration_s;
            let lo = start.max(t0);
            let hi = end.min(t1);
            if lo < hi {
                out.push((lo, hi));
            }
            k = k + T::one();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(period: f64, pulse: f64, rise: f64, lag: f64) -> OscillatorConfig<f64> {
        OscillatorConfig::new(period, pulse, rise, 1.0, lag).unwrap()
    }

    #[test]
    fn ramp_start_peak_and_wrap() {
        let c = cfg(8e-3, 8e-3, 0.9, 0.0);
        assert_eq!(c.sample(0.0), 0.0);
        assert!((c.sample(7.2e-3) - 1.0).abs() < 1e-12);
        assert_eq!(c.sample(c.rise_duration_s()), 1.0);
        assert_eq!(c.sample(8e-3), 0.0);
        assert_eq!(c.frequency_hz(), 125.0);
    }

    #[test]
    fn rise_and_fall_are_linear() {
        let c = cfg(8e-3, 8e-3, 0.9, 0.0);
        assert!((c.sample(3.6e-3) - 0.5).abs() < 1e-12);
        assert!((c.sample(7.6e-3) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn silent_gap_after_pulse() {
        let c = cfg(8e-3, 6e-3, 0.9, 0.0);
        assert_eq!(c.sample(6.5e-3), 0.0);
        assert_eq!(c.sample(7.9e-3), 0.0);
        assert!(c.sample(8.1e-3) > 0.0);
    }

    #[test]
    fn zero_before_lag() {
        let c = cfg(8e-3, 8e-3, 0.9, 1e-3);
        assert_eq!(c.sample(0.5e-3), 0.0);
        assert_eq!(c.sample(1e-3), 0.0);
        assert!(c.sample(1.5e-3) > 0.0);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(OscillatorConfig::new(0.0, 0.0, 0.9, 1.0, 0.0).is_err());
        assert!(OscillatorConfig::new(8e-3, 9e-3, 0.9, 1.0, 0.0).is_err());
        assert!(OscillatorConfig::new(8e-3, 8e-3, 0.5, 1.0, 0.0).is_err());
        assert!(OscillatorConfig::new(8e-3, 8e-3, 1.0, 1.0, 0.0).is_err());
        assert!(OscillatorConfig::new(8e-3, 8e-3, 0.9, -1.0, 0.0).is_err());
        assert!(OscillatorConfig::new(8e-3, 8e-3, 0.9, 1.0, -1e-3).is_err());
        assert!(OscillatorConfig::new(8e-3, 8e-3, 0.3, 1.0, 0.0)
            .unwrap_err()
            .to_string()
            .contains("0.5"));
    }

    #[test]
    fn silent_oscillator_has_zero_bias() {
        let c = OscillatorConfig::new(8e-3, 8e-3, 0.9, 0.0, 0.0).unwrap();
        assert_eq!(c.bias_scale(3e-3), 0.0);
        assert!(c.open_intervals(0.0, 1.0).is_empty());
    }

    #[test]
    fn open_intervals_examples() {
        let c = cfg(8e-3, 6e-3, 0.9, 0.0);
        let got = c.open_intervals(0.0, 16e-3);
        assert_eq!(got.len(), 2);
        let want = [(0.0, 6e-3), (8e-3, 14e-3)];
        for ((a, b), (x, y)) in got.iter().zip(want) {
            assert!((a - x).abs() < 1e-15 && (b - y).abs() < 1e-15, "{got:?}");
        }

        let lagged = cfg(8e-3, 6e-3, 0.9, 1e-3).open_intervals(0.0, 8e-3);
        assert_eq!(lagged.len(), 1);
        assert!((lagged[0].0 - 1e-3).abs() < 1e-15 && (lagged[0].1 - 7e-3).abs() < 1e-15);

        assert!(c.open_intervals(6.5e-3, 7.5e-3).is_empty());
        assert!(c.open_intervals(1.0, 1.0).is_empty());
    }

    #[test]
    fn phase_classification() {
        let c = cfg(8e-3, 8e-3, 0.9, 0.0);
        assert!(c.phase(0.0).is_closed());
        match c.phase(3.6e-3) {
            OscillatorPhase::Rising(x) => assert!((x - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(c.phase(7.5e-3).is_falling());
        let gap = cfg(8e-3, 6e-3, 0.9, 0.0);
        assert!(gap.phase(7e-3).is_closed());
    }

    #[test]
    fn dyadic_periodicity_is_exact() {
        // Power-of-two period keeps every offset exactly representable.
        let c = OscillatorConfig::new(0.0078125, 0.0078125, 0.75, 1.0, 0.0).unwrap();
        for k in 0..512 {
            let t = k as f64 * 2f64.powi(-16);
            assert_eq!(c.sample(t), c.sample(t + 0.0078125));
        }
    }

    proptest! {
        #[test]
        fn periodic_and_non_negative(
            t in 0.0f64..0.5,
            period in 1e-3f64..2e-2,
            pulse_frac in 0.05f64..=1.0,
            rise in 0.51f64..0.99,
            lag in 0.0f64..5e-3,
        ) {
            let c = OscillatorConfig::new(period, period * pulse_frac, rise, 2.0, lag).unwrap();
            let a = c.sample(t);
            prop_assert!((0.0..=2.0).contains(&a));
            if t >= lag {
                let b = c.sample(t + period);
                // One rounding of the cycle offset moves the output by slope * ulp.
                let slope = 2.0 / (c.fall_duration_s().min(c.rise_duration_s()));
                prop_assert!((a - b).abs() <= slope * 1e-15 * (t + period) * 8.0);
            }
        }

        #[test]
        fn lagged_copy(t in 0.0f64..0.2, lag in 0.0f64..4e-3) {
            let a = cfg(8e-3, 8e-3, 0.9, 0.0);
            let b = cfg(8e-3, 8e-3, 0.9, lag);
            if t >= lag {
                prop_assert!((b.sample(t) - a.sample(t - lag)).abs() <= 1e-9);
            } else {
                prop_assert_eq!(b.sample(t), 0.0);
            }
        }

        #[test]
        fn rise_segment_dominates(rise in 0.51f64..0.99, pulse in 1e-3f64..8e-3) {
            let c = OscillatorConfig::new(8e-3, pulse, rise, 1.0, 0.0).unwrap();
            prop_assert!(c.rise_duration_s() > c.fall_duration_s());
            prop_assert!((c.rise_duration_s() / pulse - rise).abs() < 1e-12);
            prop_assert_eq!(c.sample(c.rise_duration_s()), 1.0);
        }

        #[test]
        fn intervals_cover_positive_samples(
            period in 2e-3f64..1e-2,
            pulse_frac in 0.1f64..=1.0,
            lag in 0.0f64..3e-3,
            t in 0.0f64..0.05,
        ) {
            let c = OscillatorConfig::new(period, period * pulse_frac, 0.8, 1.0, lag).unwrap();
            let iv = c.open_intervals(0.0, 0.05);
            for w in iv.windows(2) {
                prop_assert!(w[0].1 <= w[1].0);
            }
            let inside = iv.iter().any(|&(a, b)| t > a && t < b);
            let margin = 1e-12;
            let near_edge = iv.iter().any(|&(a, b)| (t - a).abs() < margin || (t - b).abs() < margin);
            if !near_edge {
                prop_assert_eq!(inside, c.sample(t) > 0.0);
            }
        }
    }
}
