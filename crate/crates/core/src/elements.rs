//! Resistor elements of the glottal constriction and the translinear blocks
//! that realize them.
//!
//! Each element is odd-symmetric in voltage:
//!
//! ```text
//!   Linear       i = k * v
//!   Compressive  i = sign(v) * k * sqrt(|v|)
//!   Expansive    i = sign(v) * k * v^2
//! ```
//!
//! with `k = gain * bias_scale`. A zero bias opens the element.
//!
//! The tunable-resistor feedback loop is emulated behaviorally: the rectified
//! terminal voltage feeds a translinear block, and a loop capacitor slews the
//! gate voltage of an abstract square-law device until its saturation-current
//! difference matches the translinear output.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Linear,
    Compressive,
    Expansive,
}

impl ElementKind {
    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Linear => "linear",
            ElementKind::Compressive => "compressive",
            ElementKind::Expansive => "expansive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElementError {
    #[error("element gain must be finite and >= 0 (got {0})")]
    Gain(f64),
    #[error("bias_scale must lie in [0, 1] (got {0})")]
    BiasScale(f64),
    #[error("element open: no voltage sustains {current} A through a zero-conductance element")]
    Open { current: f64 },
    #[error("reference current must be finite and > 0 (got {0})")]
    ReferenceCurrent(f64),
    #[error("rectified input current must be >= 0 (got {0})")]
    NegativeInput(f64),
    #[error("transconductance must be finite and > 0 (got {0})")]
    Transconductance(f64),
}

/// One linear or nonlinear constriction resistance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistorElement<T> {
    kind: ElementKind,
    gain: T,
    bias_scale: T,
}

impl<T: Real> ResistorElement<T> {
    /// Builds an element with full bias.
    pub fn new(kind: ElementKind, gain: T) -> Result<Self, ElementError> {
        if !(gain.is_finite() && gain >= T::zero()) {
            return Err(ElementError::Gain(gain.as_f64()));
        }
        Ok(Self {
            kind,
            gain,
            bias_scale: T::one(),
        })
    }

    pub fn linear(gain: T) -> Result<Self, ElementError> {
        Self::new(ElementKind::Linear, gain)
    }

    pub fn compressive(gain: T) -> Result<Self, ElementError> {
        Self::new(ElementKind::Compressive, gain)
    }

    pub fn expansive(gain: T) -> Result<Self, ElementError> {
        Self::new(ElementKind::Expansive, gain)
    }

    pub fn with_bias(mut self, bias_scale: T) -> Result<Self, ElementError> {
        self.set_bias(bias_scale)?;
        Ok(self)
    }

    pub fn set_bias(&mut self, bias_scale: T) -> Result<(), ElementError> {
        if !(bias_scale >= T::zero() && bias_scale <= T::one()) {
            return Err(ElementError::BiasScale(bias_scale.as_f64()));
        }
        self.bias_scale = bias_scale;
        Ok(())
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn gain(&self) -> T {
        self.gain
    }

    pub fn bias_scale(&self) -> T {
        self.bias_scale
    }

    pub fn effective_coefficient(&self) -> T {
        self.gain * self.bias_scale
    }

    pub fn is_open(&self) -> bool {
        self.effective_coefficient() == T::zero()
    }

    pub fn current(&self, v: T) -> T {
        let k = self.effective_coefficient();
        if k == T::zero() {
            return T::zero();
        }
        match self.kind {
            ElementKind::Linear => k * v,
            ElementKind::Compressive => v.sign0() * k * v.abs().sqrt(),
            ElementKind::Expansive => v.sign0() * k * v * v,
        }
    }

    /// Inverse characteristic: the voltage drop that carries current `i`.
    pub fn voltage(&self, i: T) -> Result<T, ElementError> {
        let k = self.effective_coefficient();
        if k == T::zero() {
            if i == T::zero() {
                return Ok(T::zero());
            }
            return Err(ElementError::Open { current: i.as_f64() });
        }
        Ok(match self.kind {
            ElementKind::Linear => i / k,
            ElementKind::Compressive => {
                let r = i / k;
                r.sign0() * r * r
            }
            ElementKind::Expansive => i.sign0() * (i.abs() / k).sqrt(),
        })
    }

    /// `dv/di` of the inverse characteristic at `i >= 0`.
    ///
    /// Infinite for an expansive element at zero current, and for any open
    /// element.
    pub fn voltage_slope(&self, i: T) -> T {
        let k = self.effective_coefficient();
        if k == T::zero() {
            return T::infinity();
        }
        let i = i.abs();
        match self.kind {
            ElementKind::Linear => k.recip(),
            ElementKind::Compressive => T::lit(2.0) * i / (k * k),
            ElementKind::Expansive => (T::lit(2.0) * (k * i).sqrt()).recip(),
        }
    }
}

/// Translinear function block: identity, geometric mean with the reference,
/// or square over the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslinearSpec<T> {
    kind: ElementKind,
    i_ref: T,
}

impl<T: Real> TranslinearSpec<T> {
    pub fn new(kind: ElementKind, i_ref: T) -> Result<Self, ElementError> {
        if kind != ElementKind::Linear && !(i_ref.is_finite() && i_ref > T::zero()) {
            return Err(ElementError::ReferenceCurrent(i_ref.as_f64()));
        }
        Ok(Self { kind, i_ref })
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn i_ref(&self) -> T {
        self.i_ref
    }

    pub fn output(&self, i_in: T) -> Result<T, ElementError> {
        if !(i_in >= T::zero()) {
            return Err(ElementError::NegativeInput(i_in.as_f64()));
        }
        Ok(match self.kind {
            ElementKind::Linear => i_in,
            ElementKind::Compressive => (i_in * self.i_ref).sqrt(),
            ElementKind::Expansive => i_in * i_in / self.i_ref,
        })
    }
}

pub fn translinear_out<T: Real>(spec: &TranslinearSpec<T>, i_in: T) -> Result<T, ElementError> {
    spec.output(i_in)
}

/// The two half-wave rectified OTA output currents, `(positive, negative)`.
pub fn half_wave_currents<T: Real>(v_xy: T, transconductance: T) -> (T, T) {
    let i = transconductance * v_xy;
    (i.max(T::zero()), (-i).max(T::zero()))
}

/// Full-wave rectified current `g * |v_xy|`.
pub fn rectify<T: Real>(v_xy: T, transconductance: T) -> Result<T, ElementError> {
    if !(transconductance.is_finite() && transconductance > T::zero()) {
        return Err(ElementError::Transconductance(transconductance.as_f64()));
    }
    let (pos, neg) = half_wave_currents(v_xy, transconductance);
    Ok(pos + neg)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeedbackError {
    #[error("feedback loop parameter {name} is invalid (got {value})")]
    Parameter { name: &'static str, value: f64 },
    #[error("feedback did not settle after {steps} steps (residual {residual} A)")]
    NotSettled { steps: usize, residual: f64 },
    #[error(transparent)]
    Element(#[from] ElementError),
}

/// State of the emulated gate-voltage feedback loop.
///
/// The sensed device is an abstract square-law transistor whose two terminals
/// sit symmetrically about 0 V: `X` at `+v_xy/2` and `Y` at `-v_xy/2`.
/// Saturation currents referenced to each terminal are
/// `beta * max(v_gate - v_terminal - vth, 0)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackState<T> {
    pub v_gate: T,
    pub cap_farads: T,
    pub device_beta: T,
    pub device_vth: T,
    pub transconductance: T,
}

impl<T: Real> Default for FeedbackState<T> {
    /// Unit device and OTA, 1 uF loop capacitor: at `dt = 1 us` the loop
    /// settles in well under 10^4 steps for `|v_xy| <= 0.5 V`.
    fn default() -> Self {
        Self {
            v_gate: T::one(),
            cap_farads: T::lit(1e-6),
            device_beta: T::one(),
            device_vth: T::lit(0.5),
            transconductance: T::one(),
        }
    }
}

impl<T: Real> FeedbackState<T> {
    fn validate(&self) -> Result<(), FeedbackError> {
        let checks = [
            ("cap_farads", self.cap_farads, true),
            ("device_beta", self.device_beta, true),
            ("transconductance", self.transconductance, true),
            ("v_gate", self.v_gate, false),
            ("device_vth", self.device_vth, false),
        ];
        for (name, value, positive) in checks {
            if !value.is_finite() || (positive && value <= T::zero()) {
                return Err(FeedbackError::Parameter {
                    name,
                    value: value.as_f64(),
                });
            }
        }
        Ok(())
    }

    fn saturation_current(&self, v_terminal: T) -> T {
        let overdrive = (self.v_gate - v_terminal - self.device_vth).max(T::zero());
        self.device_beta * overdrive * overdrive
    }

    /// `|I_Xsat - I_Ysat|` at the present gate voltage.
    pub fn saturation_difference(&self, v_xy: T) -> T {
        let half = v_xy / T::lit(2.0);
        (self.saturation_current(half) - self.saturation_current(-half)).abs()
    }

    /// Signed current the emulated resistor passes at the present gate voltage.
    pub fn realized_current(&self, v_xy: T) -> T {
        v_xy.sign0() * self.saturation_difference(v_xy)
    }
}

/// Forward-Euler integration of `C dV_g/dt = i_target - |I_Xsat - I_Ysat|`.
///
/// Returns once the residual is within 0.1% of the target current.
pub fn settle_feedback<T: Real>(
    spec: &TranslinearSpec<T>,
    mut fb: FeedbackState<T>,
    v_xy: T,
    dt: T,
    max_steps: usize,
) -> Result<FeedbackState<T>, FeedbackError> {
    fb.validate()?;
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(FeedbackError::Parameter {
            name: "dt",
            value: dt.as_f64(),
        });
    }
    let i_target = spec.output(rectify(v_xy, fb.transconductance)?)?;
    let tolerance = T::lit(1e-3) * i_target;
    let rate = dt / fb.cap_farads;

    let mut residual = i_target - fb.saturation_difference(v_xy);
    for _ in 0..max_steps {
        if residual.abs() <= tolerance {
            return Ok(fb);
        }
        fb.v_gate = fb.v_gate + rate * residual;
        residual = i_target - fb.saturation_difference(v_xy);
        if !residual.is_finite() {
            break;
        }
    }
    if residual.abs() <= tolerance {
        return Ok(fb);
    }
    Err(FeedbackError::NotSettled {
        steps: max_steps,
        residual: residual.as_f64(),
    })
}
