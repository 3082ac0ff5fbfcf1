//! Lung pressure and its DC-voltage equivalent.
//!
//! The transducer regression maps a pressure `P` in cmH2O to the drive voltage
//! `V` through `P = 1.27 * V + 5.94`. Pressures below the 5.94 cmH2O intercept
//! would need a negative drive and are rejected.

use thiserror::Error;

use crate::scalar::Real;

/// Slope of the pressure regression, cmH2O per volt.
pub const CMH2O_PER_VOLT: f64 = 1.27;
/// Pressure at zero drive voltage, cmH2O.
pub const VOICING_ONSET_CMH2O: f64 = 5.94;
/// Upper end of the span the regression is documented for.
pub const REGRESSION_SPAN_MAX_CMH2O: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PressureError {
    #[error("pressure must be a finite, non-negative number of cmH2O (got {0})")]
    InvalidPressure(f64),
    #[error("voltage must be finite (got {0})")]
    InvalidVoltage(f64),
    #[error("pressure {0} cmH2O is below voicing-onset intercept of 5.94 cmH2O")]
    BelowVoicingOnset(f64),
    #[error("drive voltage {0} V is negative")]
    NegativeVoltage(f64),
}

/// Alveolar (subglottal) pressure in cmH2O.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PressureCmH2O<T>(T);

impl<T: Real> PressureCmH2O<T> {
    pub fn new(value: T) -> Result<Self, PressureError> {
        if !value.is_finite() || value < T::zero() {
            return Err(PressureError::InvalidPressure(value.as_f64()));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> T {
        self.0
    }

    /// True for the 7 to 10 cmH2O range of normal voiced phonation.
    pub fn is_normal_voice(self) -> bool {
        self.0 >= T::lit(7.0) && self.0 <= T::lit(10.0)
    }

    /// True inside the documented regression span, 5.94 to 15 cmH2O.
    pub fn is_within_regression_span(self) -> bool {
        self.0 >= T::lit(VOICING_ONSET_CMH2O) && self.0 <= T::lit(REGRESSION_SPAN_MAX_CMH2O)
    }
}

/// DC voltage standing in for alveolar pressure.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DcVoltage<T>(T);

impl<T: Real> DcVoltage<T> {
    pub fn new(value: T) -> Result<Self, PressureError> {
        if !value.is_finite() {
            return Err(PressureError::InvalidVoltage(value.as_f64()));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// `V = (P - 5.94) / 1.27`.
pub fn pressure_to_voltage<T: Real>(p: PressureCmH2O<T>) -> Result<DcVoltage<T>, PressureError> {
    let onset = T::lit(VOICING_ONSET_CMH2O);
    if p.0 < onset {
        return Err(PressureError::BelowVoicingOnset(p.0.as_f64()));
    }
    DcVoltage::new((p.0 - onset) / T::lit(CMH2O_PER_VOLT))
}

/// `P = 1.27 * V + 5.94`.
pub fn voltage_to_pressure<T: Real>(v: DcVoltage<T>) -> Result<PressureCmH2O<T>, PressureError> {
    if v.0 < T::zero() {
        return Err(PressureError::NegativeVoltage(v.0.as_f64()));
    }
    PressureCmH2O::new(T::lit(CMH2O_PER_VOLT) * v.0 + T::lit(VOICING_ONSET_CMH2O))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64) -> PressureCmH2O<f64> {
        PressureCmH2O::new(x).unwrap()
    }

    fn v(x: f64) -> DcVoltage<f64> {
        DcVoltage::new(x).unwrap()
    }

    #[test]
    fn ten_cmh2o_is_about_three_volts() {
        let volts = pressure_to_voltage(p(10.0)).unwrap().value();
        assert!((volts - 3.1969).abs() < 1e-4, "{volts}");
    }

    #[test]
    fn intercept_maps_to_zero() {
        assert_eq!(pressure_to_voltage(p(5.94)).unwrap().value(), 0.0);
        assert_eq!(voltage_to_pressure(v(0.0)).unwrap().value(), 5.94);
    }

    #[test]
    fn hand_inverted_points() {
        let one = pressure_to_voltage(p(7.21)).unwrap().value();
        assert!((one - 1.0).abs() < 1e-12);
        let two = voltage_to_pressure(v(2.0)).unwrap().value();
        assert!((two - 8.48).abs() < 1e-12);
        let back = voltage_to_pressure(v(3.1969)).unwrap().value();
        assert!((back - 10.0).abs() < 2e-4);
    }

    #[test]
    fn below_intercept_is_rejected() {
        let err = pressure_to_voltage(p(5.0)).unwrap_err();
        assert!(matches!(err, PressureError::BelowVoicingOnset(_)));
        assert!(err.to_string().contains("below voicing-onset intercept"));
        assert!(voltage_to_pressure(v(-0.1)).is_err());
        assert!(PressureCmH2O::new(-1.0f64).is_err());
        assert!(PressureCmH2O::new(f64::NAN).is_err());
        assert!(DcVoltage::new(f64::INFINITY).is_err());
    }

    #[test]
    fn normal_voice_window() {
        assert!(p(7.0).is_normal_voice());
        assert!(p(10.0).is_normal_voice());
        assert!(!p(6.99).is_normal_voice());
        assert!(!p(10.01).is_normal_voice());
        assert!(p(15.0).is_within_regression_span());
        assert!(!p(15.5).is_within_regression_span());
    }

    #[test]
    fn works_in_single_precision() {
        let volts = pressure_to_voltage(PressureCmH2O::new(10.0f32).unwrap()).unwrap();
        assert!((volts.value() - 3.1969).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn round_trip(x in 5.94f64..1e3) {
            let back = voltage_to_pressure(pressure_to_voltage(p(x)).unwrap()).unwrap().value();
            prop_assert!((back - x).abs() <= 1e-12 * x);
        }

        #[test]
        fn affine_step(x in 5.94f64..15.0) {
            let a = pressure_to_voltage(p(x)).unwrap().value();
            let b = pressure_to_voltage(p(x + 1.27)).unwrap().value();
            prop_assert!((b - a - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn monotone(x in 5.94f64..100.0, dx in 1e-6f64..10.0) {
            let a = pressure_to_voltage(p(x)).unwrap().value();
            let b = pressure_to_voltage(p(x + dx)).unwrap().value();
            prop_assert!(b > a);
            let pa = voltage_to_pressure(v(x)).unwrap().value();
            let pb = voltage_to_pressure(v(x + dx)).unwrap().value();
            prop_assert!(pb > pa);
        }
    }
}
