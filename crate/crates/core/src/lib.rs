//! Windowed-DFT phasor estimation laboratory.
//!
//! Synthesizes magnitude- and phase-modulated carriers, runs the multi-cycle
//! rectangular-window DFT phasor estimator on them, predicts the resulting
//! oscillation attenuation and phase shift from the closed-form complex gain
//! `H1(e^{jλ})`, and inverts that gain to recover the true oscillation.
//!
//! ```
//! use pmulab::{predict_oscillation, ModulationSpec, WaveformSpec, WindowSpec};
//!
//! let w = WaveformSpec::default();
//! let m = ModulationSpec::magnitude(0.01, 20.0);
//! let p = predict_oscillation(&w, &m, &WindowSpec::new(8, 16).unwrap()).unwrap();
//! assert!((p.gain.theta_deg() - 116.25).abs() < 1e-9);
//! ```

pub mod analysis;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod format;
pub mod reproduce;
pub mod response;
pub mod signal;

pub use analysis::{
    analyze, estimate_fm, fit_sinusoid, recover, recover_with_floor, AnalysisReport, OscillationEstimate,
    RecoveredOscillation,
};
pub use error::{Error, Result};
pub use estimator::{
    demodulate, design_antialias, estimate_phasors, FilterSpec, PhasorFrame, PhasorStream, ReportingSpec,
    TimestampConvention, WindowSpec,
};
pub use format::Metadata;
pub use reproduce::{measure_oscillation, reproduce_table1, Table1Config, Table1Report};
pub use response::{
    comb_nulls, decompose_baseband, h1, h1_bruteforce, predict_oscillation, response_curve, BasebandDecomposition,
    Channel, ComplexGain, GainClass, PredictedOscillation,
};
pub use signal::{synthesize, ModulationKind, ModulationSpec, Waveform, WaveformSpec};
