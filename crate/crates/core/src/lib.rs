//! Behavioral circuit model of the human glottal voice source.
//!
//! Lung pressure becomes a DC drive voltage across a series string of four
//! resistor elements. The lower fold is a linear plus a square-root element,
//! the upper fold a linear plus a square-law element, and each fold is gated
//! by a relaxation-oscillator sawtooth. The current through the string is the
//! glottal flow; its time derivative is the excitation seen by the vocal
//! tract.
//!
//! Every model type is generic over the scalar ([`Real`], implemented for
//! `f32` and `f64`). The aliases below fix the scalar to `f64`, which is what
//! the command-line driver uses.
//!
//! ```
//! use glottis::{pressure_to_voltage, simulate, Circuit, Pressure};
//!
//! let drive = pressure_to_voltage(Pressure::new(10.0).unwrap()).unwrap();
//! let w = simulate(&Circuit::normal_voice(drive), 0.1, 44_100.0).unwrap();
//! let f0 = glottis::analysis::estimate_f0(&w).unwrap();
//! assert!((f0 - 125.0).abs() < 1.0);
//! ```

pub mod analysis;
pub mod elements;
pub mod network;
pub mod oscillator;
pub mod pressure;
pub mod scalar;

pub use analysis::{AnalysisError, AnalysisReport, Interval, PhaseSegmentation};
pub use elements::{
    rectify, settle_feedback, translinear_out, ElementError, ElementKind, FeedbackError,
    FeedbackState, ResistorElement, TranslinearSpec,
};
pub use network::{
    conductance_traces, simulate, solve_series_current, FoldStage, GlottalCircuit,
    GlottalWaveform, NetworkError,
};
pub use oscillator::{OscillatorConfig, OscillatorError, OscillatorPhase};
pub use pressure::{pressure_to_voltage, voltage_to_pressure, DcVoltage, PressureCmH2O, PressureError};
pub use scalar::Real;

pub type Pressure = PressureCmH2O<f64>;
pub type Voltage = DcVoltage<f64>;
pub type Oscillator = OscillatorConfig<f64>;
pub type Element = ResistorElement<f64>;
pub type Translinear = TranslinearSpec<f64>;
pub type Feedback = FeedbackState<f64>;
pub type Fold = FoldStage<f64>;
pub type Circuit = GlottalCircuit<f64>;
pub type Waveform = GlottalWaveform<f64>;
pub type Report = AnalysisReport<f64>;

pub type Circuit32 = GlottalCircuit<f32>;
pub type Waveform32 = GlottalWaveform<f32>;
