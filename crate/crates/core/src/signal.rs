//! Sampled single-phase waveforms with sinusoidal magnitude or phase modulation.
//!
//! Magnitude modulation:
//! `x[p] = √2·V·(1 + α·sin(Ωm·p + φm))·cos(ω0·p + φ0)`
//!
//! Phase modulation:
//! `x[p] = √2·V·cos(ω0·p + φ0 + β·sin(Ωm·p + φm))`
//!
//! with `ω0 = 2π·f0/fs` and `Ωm = 2π·fm/fs`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::format::{self, fmt_float, Metadata};

/// Phase-modulation index above which the small-angle model exceeds its 0.5 % error bound.
pub const SMALL_ANGLE_LIMIT: f64 = 0.1;

/// Carrier and sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformSpec {
    /// RMS magnitude (per unit).
    pub v_rms: f64,
    /// Carrier frequency in Hz.
    pub f0: f64,
    /// Sampling rate in Hz.
    pub fs: f64,
    /// Initial carrier phase in radians.
    pub phi0: f64,
    /// Number of samples.
    pub duration: usize,
}

impl Default for WaveformSpec {
    /// 1 p.u. at 60 Hz sampled at 960 Hz for 4 s.
    fn default() -> Self {
        Self {
            v_rms: 1.0,
            f0: 60.0,
            fs: 960.0,
            phi0: 0.0,
            duration: 3840,
        }
    }
}

impl WaveformSpec {
    pub fn with_phi0(mut self, phi0: f64) -> Self {
        self.phi0 = phi0;
        self
    }

    pub fn with_duration(mut self, samples: usize) -> Self {
        self.duration = samples;
        self
    }

    /// Sets the duration in seconds, rounded to the nearest sample.
    pub fn with_duration_secs(mut self, secs: f64) -> Self {
        self.duration = (secs * self.fs).round().max(0.0) as usize;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_rms.is_finite() && self.v_rms > 0.0) {
            return Err(Error::InvalidParameter {
                name: "v_rms",
                reason: format!("must be finite and > 0, got {}", self.v_rms),
            });
        }
        if !(self.f0.is_finite() && self.f0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "f0",
                reason: format!("must be finite and > 0, got {}", self.f0),
            });
        }
        if !self.fs.is_finite() || self.fs <= 2.0 * self.f0 {
            return Err(Error::Nyquist {
                fs: self.fs,
                f0: self.f0,
            });
        }
        if !self.phi0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi0",
                reason: "must be finite".into(),
            });
        }
        self.samples_per_cycle().map(|_| ())
    }

    /// Samples per carrier cycle `N = fs/f0`; must be an integer.
    pub fn samples_per_cycle(&self) -> Result<usize> {
        let ratio = self.fs / self.f0;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio {
            return Err(Error::NonIntegerCycle { ratio });
        }
        Ok(n as usize)
    }

    /// Normalized carrier frequency ω0 in rad/sample.
    pub fn omega0(&self) -> f64 {
        2.0 * PI * self.f0 / self.fs
    }

    pub fn metadata(&self) -> Metadata {
        let mut m = Metadata::new();
        m.set("waveform.v_rms", self.v_rms);
        m.set("waveform.f0_hz", self.f0);
        m.set("waveform.fs_hz", self.fs);
        m.set("waveform.phi0_rad", self.phi0);
        m.set("waveform.duration_samples", self.duration);
        m
    }
}

/// Which quantity the oscillation modulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulationKind {
    None,
    Magnitude,
    Phase,
}

impl fmt::Display for ModulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModulationKind::None => "none",
            ModulationKind::Magnitude => "magnitude",
            ModulationKind::Phase => "phase",
        })
    }
}

impl FromStr for ModulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "magnitude" | "mag" | "amplitude" => Ok(Self::Magnitude),
            "phase" | "angle" => Ok(Self::Phase),
            other => Err(Error::Parse(format!("unknown modulation kind {other:?}"))),
        }
    }
}

/// Oscillation applied on top of the carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSpec {
    pub kind: ModulationKind,
    /// α (dimensionless) for magnitude modulation, β (rad) for phase modulation.
    pub index: f64,
    /// Oscillation frequency in Hz.
    pub fm: f64,
    /// Initial oscillation phase in radians.
    pub phim: f64,
}

impl ModulationSpec {
    pub fn none() -> Self {
        Self {
            kind: ModulationKind::None,
            index: 0.0,
            fm: 0.0,
            phim: 0.0,
        }
    }

    pub fn magnitude(alpha: f64, fm: f64) -> Self {
        Self {
            kind: ModulationKind::Magnitude,
            index: alpha,
            fm,
            phim: 0.0,
        }
    }

    pub fn phase(beta: f64, fm: f64) -> Self {
        Self {
            kind: ModulationKind::Phase,
            index: beta,
            fm,
            phim: 0.0,
        }
    }

    pub fn with_phim(mut self, phim: f64) -> Self {
        self.phim = phim;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ModulationKind::None {
            return Ok(());
        }
        if !(self.index.is_finite() && self.index >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "index",
                reason: format!("must be finite and >= 0, got {}", self.index),
            });
        }
        if !(self.fm.is_finite() && self.fm >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "fm",
                reason: format!("must be finite and >= 0, got {}", self.fm),
            });
        }
        if !self.phim.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phim",
                reason: "must be finite".into(),
            });
        }
        if self.exceeds_small_angle() {
            log::warn!(
                "phase-modulation index {} rad >= {SMALL_ANGLE_LIMIT} rad: linearized predictions exceed 0.5 % error",
                self.index
            );
        }
        Ok(())
    }

    /// True for phase modulation with β at or above [`SMALL_ANGLE_LIMIT`].
    pub fn exceeds_small_angle(&self) -> bool {
        self.kind == ModulationKind::Phase && self.index >= SMALL_ANGLE_LIMIT
    }

    /// Normalized oscillation frequency Ωm in rad/sample.
    pub fn omega_m(&self, fs: f64) -> f64 {
        2.0 * PI * self.fm / fs
    }

    pub fn metadata(&self) -> Metadata {
        let mut m = Metadata::new();
        m.set("modulation.kind", self.kind);
        m.set("modulation.index", self.index);
        m.set("modulation.fm_hz", self.fm);
        m.set("modulation.phim_rad", self.phim);
        m
    }
}

/// A real sampled waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub fs: f64,
    /// Nominal carrier frequency the waveform was generated (or recorded) at.
    pub f0: f64,
    /// Sample index `p` of `samples[0]`.
    pub start_index: i64,
    pub metadata: Metadata,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Absolute sample index of `samples[i]`.
    pub fn index_of(&self, i: usize) -> i64 {
        self.start_index + i as i64
    }

    pub fn to_csv(&self) -> String {
        let digits = format::precision_digits();
        let mut out = String::with_capacity(self.samples.len() * 48);
        out.push_str("sample_index,time_s,value\n");
        for (i, &v) in self.samples.iter().enumerate() {
            let p = self.index_of(i);
            out.push_str(&format!(
                "{p},{},{}\n",
                fmt_float(p as f64 / self.fs, digits),
                fmt_float(v, digits)
            ));
        }
        out
    }

    /// Parses the CSV written by [`Waveform::to_csv`]; `fs` and `f0` are not stored in the file.
    pub fn from_csv(text: &str, fs: f64, f0: f64) -> Result<Self> {
        let rows = format::parse_csv(text, "sample_index,time_s,value")?;
        let mut samples = Vec::with_capacity(rows.len());
        let mut start_index = 0;
        for (i, row) in rows.iter().enumerate() {
            let p: i64 = format::parse_field(row[0], "sample_index")?;
            let t: f64 = format::parse_field(row[1], "time_s")?;
            let v: f64 = format::parse_field(row[2], "value")?;
            if i == 0 {
                start_index = p;
            } else if p != start_index + i as i64 {
                return Err(Error::Parse(format!("non-contiguous sample_index {p}")));
            }
            let expected = p as f64 / fs;
            if (t - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(Error::Parse(format!(
                    "time_s {t} inconsistent with sample {p} at fs = {fs} Hz"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite sample at index {p}")));
            }
            samples.push(v);
        }
        let mut metadata = Metadata::new();
        metadata.set("waveform.f0_hz", f0);
        metadata.set("waveform.fs_hz", fs);
        metadata.set("waveform.duration_samples", samples.len());
        Ok(Self {
            samples,
            fs,
            f0,
            start_index,
            metadata,
        })
    }
}

/// Generates the sampled waveform for `w` under modulation `m`.
pub fn synthesize(w: &WaveformSpec, m: &ModulationSpec) -> Result<Waveform> {
    w.validate()?;
    m.validate()?;
    let amp = SQRT_2 * w.v_rms;
    let omega0 = w.omega0();
    let omega_m = m.omega_m(w.fs);
    let samples = (0..w.duration)
        .map(|p| {
            let p = p as f64;
            match m.kind {
                ModulationKind::None => amp * (omega0 * p + w.phi0).cos(),
                ModulationKind::Magnitude => {
                    amp * (1.0 + m.index * (omega_m * p + m.phim).sin()) * (omega0 * p + w.phi0).cos()
                }
                ModulationKind::Phase => amp * (omega0 * p + w.phi0 + m.index * (omega_m * p + m.phim).sin()).cos(),
            }
        })
        .collect();
    let mut metadata = w.metadata();
    metadata.extend(&m.metadata());
    Ok(Waveform {
        samples,
        fs: w.fs,
        f0: w.f0,
        start_index: 0,
        metadata,
    })
}
