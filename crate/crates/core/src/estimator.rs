//! Multi-cycle rectangular-window DFT phasor estimator.
//!
//! The input is demodulated to the synchronously rotating frame,
//! `y[p] = x[p]·e^{-jω0 p}`, optionally low-pass filtered, averaged over
//! `L = h·N` samples with RMS scaling `√2/L`, and reported every `D = fs/fps`
//! samples.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::format::{self, fmt_float, Metadata};
use crate::signal::Waveform;

/// Frame time tag: first sample of the window, or its midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimestampConvention {
    #[default]
    LeftEdge,
    Center,
}

impl fmt::Display for TimestampConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimestampConvention::LeftEdge => "left",
            TimestampConvention::Center => "center",
        })
    }
}

impl FromStr for TimestampConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "leftedge" | "left_edge" => Ok(Self::LeftEdge),
            "center" | "centre" => Ok(Self::Center),
            other => Err(Error::Parse(format!("unknown timestamp convention {other:?}"))),
        }
    }
}

/// DFT window of `h` carrier cycles, `N` samples each, analyzing bin `k = h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub h: usize,
    pub n_per_cycle: usize,
    pub timestamp: TimestampConvention,
}

impl WindowSpec {
    pub fn new(h: usize, n_per_cycle: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: "window must span at least one cycle".into(),
            });
        }
        if n_per_cycle == 0 {
            return Err(Error::InvalidParameter {
                name: "n_per_cycle",
                reason: "must be >= 1".into(),
            });
        }
        Ok(Self {
            h,
            n_per_cycle,
            timestamp: TimestampConvention::LeftEdge,
        })
    }

    pub fn with_timestamp(mut self, timestamp: TimestampConvention) -> Self {
        self.timestamp = timestamp;
        self
    }

    /// Window length `L = h·N` in samples.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.h * self.n_per_cycle
    }

    /// DFT bin, `k = h`, so that the bin frequency equals the carrier.
    pub fn bin(&self) -> usize {
        self.h
    }

    /// Carrier angular frequency `ω0 = 2π/N` rad/sample.
    pub fn omega0(&self) -> f64 {
        TAU / self.n_per_cycle as f64
    }

    /// Offset in samples from the window's left edge to its time tag.
    pub fn timestamp_offset(&self) -> f64 {
        match self.timestamp {
            TimestampConvention::LeftEdge => 0.0,
            TimestampConvention::Center => (self.len() as f64 - 1.0) / 2.0,
        }
    }

    pub fn metadata(&self) -> Metadata {
        let mut m = Metadata::new();
        m.set("window.h", self.h);
        m.set("window.n_per_cycle", self.n_per_cycle);
        m.set("window.len", self.len());
        m.set("window.bin", self.bin());
        m.set("window.timestamp", self.timestamp);
        m
    }
}

/// Odd-length linear-phase FIR low-pass applied to `y[p]` before windowing.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub taps: Vec<f64>,
    /// Nominal cutoff (Hz).
    pub cutoff: f64,
    pub fs: f64,
}

impl FilterSpec {
    pub fn identity(fs: f64) -> Self {
        Self {
            taps: vec![1.0],
            cutoff: fs / 2.0,
            fs,
        }
    }

    /// `(taps - 1)/2` samples.
    pub fn group_delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    pub fn is_identity(&self) -> bool {
        self.taps.len() == 1 && self.taps[0] == 1.0
    }

    pub fn dc_gain(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Zero-phase amplitude response at `f` Hz (real; the linear phase is removed).
    pub fn amplitude(&self, f: f64) -> f64 {
        let g = self.group_delay();
        let w = TAU * f / self.fs;
        self.taps[g] + 2.0 * (1..=g).map(|k| self.taps[g + k] * (w * k as f64).cos()).sum::<f64>()
    }

    /// Filters `input` and returns only the fully supported, delay-compensated part:
    /// output `i` is centered on `input[i + group_delay]`.
    pub fn apply_centered(&self, input: &[Complex64]) -> Vec<Complex64> {
        let t = self.taps.len();
        if input.len() < t {
            return Vec::new();
        }
        (0..=input.len() - t)
            .map(|i| self.taps.iter().rev().zip(&input[i..i + t]).map(|(&b, &y)| y * b).sum())
            .collect()
    }
}

/// Tap budget used by [`design_antialias`].
pub const DEFAULT_TAP_BUDGET: usize = 8191;
/// Maximum passband deviation from unity gain.
pub const PASSBAND_RIPPLE: f64 = 1e-3;
/// Minimum stopband attenuation in dB.
pub const STOPBAND_DB: f64 = 60.0;
// Kaiser design target, with margin over the acceptance limits
const DESIGN_DB: f64 = 65.0;

fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn kaiser_lowpass(num_taps: usize, cutoff: f64, fs: f64, beta: f64) -> Vec<f64> {
    let g = (num_taps - 1) as f64 / 2.0;
    let fc = 2.0 * cutoff / fs;
    let i0_beta = bessel_i0(beta);
    let mut taps: Vec<f64> = (0..num_taps)
        .map(|n| {
            let t = n as f64 - g;
            let sinc = if t == 0.0 {
                1.0
            } else {
                (PI * fc * t).sin() / (PI * fc * t)
            };
            let r = if g == 0.0 { 0.0 } else { t / g };
            let win = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
            fc * sinc * win
        })
        .collect();
    // symmetrize against rounding, then pin DC gain to 1
    for n in 0..num_taps / 2 {
        let avg = 0.5 * (taps[n] + taps[num_taps - 1 - n]);
        taps[n] = avg;
        taps[num_taps - 1 - n] = avg;
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|b| *b /= sum);
    taps
}

/// Worst passband deviation and worst stopband gain over dense grids.
pub fn check_antialias(filter: &FilterSpec, fps: f64) -> (f64, f64) {
    let pass_edge = 0.4 * fps;
    let stop_edge = 0.5 * fps;
    let nyq = filter.fs / 2.0;
    let pass_pts = 1024;
    let stop_pts = (16 * filter.taps.len()).max(1024);
    let ripple = (0..=pass_pts)
        .map(|i| (filter.amplitude(pass_edge * i as f64 / pass_pts as f64) - 1.0).abs())
        .fold(0.0, f64::max);
    let stop = (0..=stop_pts)
        .map(|i| {
            let f = stop_edge + (nyq - stop_edge) * i as f64 / stop_pts as f64;
            filter.amplitude(f).abs()
        })
        .fold(0.0, f64::max);
    (ripple, stop)
}

/// Anti-alias low-pass for decimating `fs` to `fps`, within [`DEFAULT_TAP_BUDGET`] taps.
pub fn design_antialias(fps: f64, fs: f64) -> Result<FilterSpec> {
    design_antialias_with_budget(fps, fs, DEFAULT_TAP_BUDGET)
}

/// Kaiser-window low-pass: passband `[0, 0.4·fps]` with ripple below 0.1 %,
/// at least 60 dB attenuation from `0.5·fps` to `fs/2`.
pub fn design_antialias_with_budget(fps: f64, fs: f64, max_taps: usize) -> Result<FilterSpec> {
    let decimation = decimation_factor(fs, fps)?;
    if decimation == 1 {
        return Ok(FilterSpec::identity(fs));
    }
    let transition = TAU * 0.1 * fps / fs;
    let beta = 0.1102 * (DESIGN_DB - 8.7);
    let estimate = ((DESIGN_DB - 7.95) / (2.285 * transition)).ceil() as usize + 1;
    let mut num_taps = estimate | 1;
    let cutoff = 0.45 * fps;
    let stop_limit = 10f64.powf(-STOPBAND_DB / 20.0);
    loop {
        if num_taps > max_taps {
            return Err(Error::FilterTooLong {
                required: num_taps,
                budget: max_taps,
            });
        }
        let filter = FilterSpec {
            taps: kaiser_lowpass(num_taps, cutoff, fs, beta),
            cutoff,
            fs,
        };
        let (ripple, stop) = check_antialias(&filter, fps);
        if ripple < PASSBAND_RIPPLE && stop <= stop_limit {
            return Ok(filter);
        }
        num_taps = (num_taps + num_taps / 20 + 2) | 1;
    }
}

fn decimation_factor(fs: f64, fps: f64) -> Result<usize> {
    if !(fps > 0.0 && fps.is_finite() && fs.is_finite()) || fps > fs {
        return Err(Error::InvalidParameter {
            name: "fps",
            reason: format!("reporting rate {fps} must be in (0, fs = {fs}]"),
        });
    }
    let ratio = fs / fps;
    let d = ratio.round();
    if (ratio - d).abs() > 1e-9 * ratio {
        return Err(Error::NonIntegerDecimation { fs, fps });
    }
    Ok(d as usize)
}

/// Reporting rate, decimation and optional anti-alias filter.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportingSpec {
    pub fps: f64,
    pub fs: f64,
    /// `D = fs/fps`.
    pub decimation: usize,
    /// Frames sit at sample indices `start + phase + k·D`.
    pub decimation_phase: usize,
    pub antialias: Option<FilterSpec>,
}

impl ReportingSpec {
    pub fn new(fps: f64, fs: f64) -> Result<Self> {
        Ok(Self {
            fps,
            fs,
            decimation: decimation_factor(fs, fps)?,
            decimation_phase: 0,
            antialias: None,
        })
    }

    /// Every sample reported (`fps = fs`).
    pub fn every_sample(fs: f64) -> Self {
        Self {
            fps: fs,
            fs,
            decimation: 1,
            decimation_phase: 0,
            antialias: None,
        }
    }

    pub fn with_decimation_phase(mut self, phase: usize) -> Result<Self> {
        if phase >= self.decimation {
            return Err(Error::InvalidParameter {
                name: "decimation_phase",
                reason: format!("{phase} must be below the decimation factor {}", self.decimation),
            });
        }
        self.decimation_phase = phase;
        Ok(self)
    }

    /// Attaches the default anti-alias filter for this rate.
    pub fn with_antialias(mut self) -> Result<Self> {
        self.antialias = Some(design_antialias(self.fps, self.fs)?);
        Ok(self)
    }

    pub fn with_filter(mut self, filter: FilterSpec) -> Result<Self> {
        if filter.fs != self.fs || filter.taps.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "antialias",
                reason: "filter must be odd-length and designed for the same fs".into(),
            });
        }
        self.antialias = Some(filter);
        Ok(self)
    }

    pub fn metadata(&self) -> Metadata {
        let mut m = Metadata::new();
        m.set("reporting.fps", self.fps);
        m.set("reporting.decimation", self.decimation);
        m.set("reporting.decimation_phase", self.decimation_phase);
        match &self.antialias {
            Some(f) => {
                m.set("reporting.antialias", "on");
                m.set("reporting.antialias_taps", f.taps.len());
                m.set("reporting.antialias_cutoff_hz", f.cutoff);
                m.set("reporting.antialias_group_delay", f.group_delay());
            }
            None => m.set("reporting.antialias", "off"),
        }
        m
    }
}

/// One reported phasor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasorFrame {
    /// Sample index of the window's left edge (delay-compensated when filtered).
    pub index: i64,
    pub timestamp_s: f64,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasorStream {
    pub frames: Vec<PhasorFrame>,
    pub fps: f64,
    pub fs: f64,
    pub window: WindowSpec,
    pub metadata: Metadata,
}

pub const PHASOR_CSV_HEADER: &str = "frame_index,timestamp_s,mag_rms,angle_rad,real,imag";

impl PhasorStream {
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.frames.iter().map(|f| f.value)
    }

    pub fn timestamps(&self) -> impl Iterator<Item = f64> + '_ {
        self.frames.iter().map(|f| f.timestamp_s)
    }

    pub fn to_csv(&self) -> String {
        let digits = format::precision_digits();
        let mut out = String::from(PHASOR_CSV_HEADER);
        out.push('\n');
        for f in &self.frames {
            let mut angle = f.value.arg();
            if angle <= -PI {
                angle = PI;
            }
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                f.index,
                fmt_float(f.timestamp_s, digits),
                fmt_float(f.value.norm(), digits),
                fmt_float(angle, digits),
                fmt_float(f.value.re, digits),
                fmt_float(f.value.im, digits)
            ));
        }
        out
    }

    /// Rebuilds a stream from its CSV and metadata sidecar.
    pub fn from_csv(text: &str, metadata: Metadata) -> Result<Self> {
        let need_usize = |k: &str| {
            metadata
                .get_usize(k)
                .ok_or_else(|| Error::Parse(format!("metadata missing `{k}`")))
        };
        let need_f64 = |k: &str| {
            metadata
                .get_f64(k)
                .ok_or_else(|| Error::Parse(format!("metadata missing `{k}`")))
        };
        let timestamp = match metadata.get("window.timestamp") {
            Some(s) => s.parse()?,
            None => TimestampConvention::LeftEdge,
        };
        let window =
            WindowSpec::new(need_usize("window.h")?, need_usize("window.n_per_cycle")?)?.with_timestamp(timestamp);
        let fps = need_f64("reporting.fps")?;
        let fs = need_f64("waveform.fs_hz")?;
        let frames = format::parse_csv(text, PHASOR_CSV_HEADER)?
            .into_iter()
            .map(|row| {
                Ok(PhasorFrame {
                    index: format::parse_field(row[0], "frame_index")?,
                    timestamp_s: format::parse_field(row[1], "timestamp_s")?,
                    value: Complex64::new(
                        format::parse_field(row[4], "real")?,
                        format::parse_field(row[5], "imag")?,
                    ),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            frames,
            fps,
            fs,
            window,
            metadata,
        })
    }
}

fn check_window(x: &Waveform, w: &WindowSpec) -> Result<()> {
    let ratio = x.fs / x.f0;
    if (ratio - w.n_per_cycle as f64).abs() > 1e-9 * ratio {
        return Err(Error::WindowMismatch {
            window: w.len(),
            n_per_cycle: ratio.round() as usize,
        });
    }
    Ok(())
}

fn rotor(p: i64, n_per_cycle: usize) -> Complex64 {
    // reduce p modulo N so the reference phase stays exact for long records
    let r = p.rem_euclid(n_per_cycle as i64) as f64;
    Complex64::from_polar(1.0, -TAU * r / n_per_cycle as f64)
}

/// `y[p] = x[p]·e^{-jω0 p}` for every sample.
pub fn demodulate(x: &Waveform, w: &WindowSpec) -> Result<Vec<Complex64>> {
    check_window(x, w)?;
    Ok(x.samples
        .iter()
        .enumerate()
        .map(|(i, &v)| rotor(x.index_of(i), w.n_per_cycle) * v)
        .collect())
}

/// Single-bin DFT phasor `(√2/L)·Σ x[m+n]·e^{-jω_k(m+n)}`, `ω_k = 2πk/L`, window at
/// `samples[offset..offset+len]`.
pub fn windowed_dft(x: &Waveform, offset: usize, len: usize, bin: usize) -> Result<Complex64> {
    if offset + len > x.len() || len == 0 {
        return Err(Error::SignalTooShort {
            len: x.len(),
            window: offset + len,
        });
    }
    let omega_k = TAU * bin as f64 / len as f64;
    let sum: Complex64 = (0..len)
        .map(|n| {
            let p = x.index_of(offset + n) as f64;
            x.samples[offset + n] * Complex64::from_polar(1.0, -omega_k * p)
        })
        .sum();
    Ok(sum * (SQRT_2 / len as f64))
}

/// Runs the estimator over `x` and reports frames at `r.fps`.
///
/// Frames whose window would run past the supported signal are dropped. With an
/// anti-alias filter only fully supported filter outputs are used and frame
/// indices refer to the input sample grid, so no extra delay appears in the timestamps.
pub fn estimate_phasors(x: &Waveform, w: &WindowSpec, r: &ReportingSpec) -> Result<PhasorStream> {
    if (r.fs - x.fs).abs() > 1e-9 * x.fs {
        return Err(Error::InvalidParameter {
            name: "fs",
            reason: format!("reporting spec built for {} Hz, waveform sampled at {} Hz", r.fs, x.fs),
        });
    }
    let len = w.len();
    let y = demodulate(x, w)?;
    let filter = r.antialias.as_ref().filter(|f| !f.is_identity());
    let (z, z_start) = match filter {
        Some(f) => (f.apply_centered(&y), x.start_index + f.group_delay() as i64),
        None => (y, x.start_index),
    };
    let needed = len + filter.map_or(0, |f| f.taps.len() - 1);
    if z.len() < len {
        return Err(Error::SignalTooShort {
            len: x.len(),
            window: needed,
        });
    }

    // frame grid anchored at the waveform's first sample
    let anchor = x.start_index + r.decimation_phase as i64;
    let d = r.decimation as i64;
    let mut m = anchor + (z_start - anchor).max(0).div_euclid(d) * d;
    if m < z_start {
        m += d;
    }
    let z_end = z_start + z.len() as i64;
    let scale = SQRT_2 / len as f64;
    let offset = w.timestamp_offset();
    let mut frames = Vec::new();
    while m + len as i64 <= z_end {
        let lo = (m - z_start) as usize;
        let value = z[lo..lo + len].iter().sum::<Complex64>() * scale;
        frames.push(PhasorFrame {
            index: m,
            timestamp_s: (m as f64 + offset) / x.fs,
            value,
        });
        m += d;
    }
    if frames.is_empty() {
        return Err(Error::SignalTooShort {
            len: x.len(),
            window: needed + r.decimation_phase,
        });
    }

    let mut metadata = x.metadata.clone();
    metadata.set("waveform.fs_hz", x.fs);
    metadata.set("waveform.f0_hz", x.f0);
    metadata.extend(&w.metadata());
    metadata.extend(&r.metadata());
    metadata.set("stream.frames", frames.len());
    Ok(PhasorStream {
        frames,
        fps: r.fps,
        fs: x.fs,
        window: *w,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize, ModulationSpec, WaveformSpec};
    use proptest::prelude::*;

    fn carrier(phi0: f64) -> Waveform {
        synthesize(&WaveformSpec::default().with_phi0(phi0), &ModulationSpec::none()).unwrap()
    }

    #[test]
    fn demodulated_carrier_averages_to_half_root_two() {
        let x = carrier(0.0);
        let w = WindowSpec::new(1, 16).unwrap();
        let y = demodulate(&x, &w).unwrap();
        assert_eq!(y[0], Complex64::new(SQRT_2, 0.0));
        let mean: Complex64 = y[..16].iter().sum::<Complex64>() / 16.0;
        assert!((mean - Complex64::new(SQRT_2 / 2.0, 0.0)).norm() < 1e-14);
        let mean: Complex64 = y[..128].iter().sum::<Complex64>() / 128.0;
        assert!((mean - Complex64::new(SQRT_2 / 2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn demodulation_matches_direct_product() {
        // fixed pseudo-random 16-sample input
        let samples: Vec<f64> = (0..16).map(|i| ((i * 7919 % 23) as f64 - 11.0) / 7.0).collect();
        let x = Waveform {
            samples: samples.clone(),
            fs: 960.0,
            f0: 60.0,
            start_index: 0,
            metadata: Metadata::new(),
        };
        let y = demodulate(&x, &WindowSpec::new(1, 16).unwrap()).unwrap();
        for (p, (&v, &yp)) in samples.iter().zip(&y).enumerate() {
            let direct = Complex64::new(v * (TAU * p as f64 / 16.0).cos(), -v * (TAU * p as f64 / 16.0).sin());
            assert!((yp - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn carrier_frames_are_unit_phasors() {
        for phi0 in [0.0, PI / 6.0] {
            let x = carrier(phi0);
            let expected = Complex64::from_polar(1.0, phi0);
            for h in [1, 2, 4, 8] {
                let w = WindowSpec::new(h, 16).unwrap();
                let s = estimate_phasors(&x, &w, &ReportingSpec::new(60.0, 960.0).unwrap()).unwrap();
                assert!(s.values().all(|v| (v - expected).norm() < 1e-12));
            }
        }
    }

    #[test]
    fn frame_grid_and_timestamps() {
        let x = carrier(0.0);
        let w = WindowSpec::new(4, 16).unwrap();
        let r = ReportingSpec::new(60.0, 960.0).unwrap();
        let s = estimate_phasors(&x, &w, &r).unwrap();
        assert_eq!(s.frames[0].index, 0);
        assert_eq!(s.frames[1].index, 16);
        // last window must end inside the record
        let last = s.frames.last().unwrap().index as usize;
        assert!(last + 64 <= 3840 && last + 64 + 16 > 3840);
        assert_eq!(s.frames[3].timestamp_s, 48.0 / 960.0);

        let c = estimate_phasors(&x, &w.with_timestamp(TimestampConvention::Center), &r).unwrap();
        assert_eq!(c.frames[3].timestamp_s, (48.0 + 31.5) / 960.0);
        let shifted = estimate_phasors(&x, &w, &r.clone().with_decimation_phase(5).unwrap()).unwrap();
        assert_eq!(shifted.frames[0].index, 5);
    }

    #[test]
    fn short_signal_is_rejected() {
        let x = synthesize(&WaveformSpec::default().with_duration(63), &ModulationSpec::none()).unwrap();
        let w = WindowSpec::new(4, 16).unwrap();
        let err = estimate_phasors(&x, &w, &ReportingSpec::new(60.0, 960.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::SignalTooShort { len: 63, window: 64 }));
    }

    #[test]
    fn mismatched_window_is_rejected() {
        let x = carrier(0.0);
        let w = WindowSpec::new(1, 20).unwrap();
        assert!(matches!(demodulate(&x, &w), Err(Error::WindowMismatch { .. })));
    }

    #[test]
    fn reporting_rate_must_divide_fs() {
        assert!(matches!(
            ReportingSpec::new(50.0 * 1.3, 960.0),
            Err(Error::NonIntegerDecimation { .. })
        ));
        assert_eq!(ReportingSpec::new(240.0, 960.0).unwrap().decimation, 4);
        assert!(ReportingSpec::new(60.0, 960.0)
            .unwrap()
            .with_decimation_phase(16)
            .is_err());
    }

    #[test]
    fn antialias_for_sixty_fps() {
        let f = design_antialias(60.0, 960.0).unwrap();
        assert_eq!(f.taps.len() % 2, 1);
        assert!((f.dc_gain() - 1.0).abs() < 1e-12);
        let n = f.taps.len();
        assert!((0..n / 2).all(|i| f.taps[i] == f.taps[n - 1 - i]));
        // independent complex evaluation of Σ b[k] e^{-jωk}
        let response = |freq: f64| -> f64 {
            f.taps
                .iter()
                .enumerate()
                .map(|(k, &b)| Complex64::from_polar(b, -TAU * freq * k as f64 / 960.0))
                .sum::<Complex64>()
                .norm()
        };
        assert!(20.0 * response(30.0).log10() <= -60.0);
        for i in 0..=2000 {
            let freq = 30.0 + 450.0 * i as f64 / 2000.0;
            assert!(20.0 * response(freq).log10() <= -60.0, "{freq} Hz");
        }
        for i in 0..=240 {
            let freq = 24.0 * i as f64 / 240.0;
            assert!((response(freq) - 1.0).abs() < 1e-3, "{freq} Hz");
        }
        let dc = vec![Complex64::new(0.7, -0.2); n + 50];
        assert!(f.apply_centered(&dc).iter().all(|v| (v - dc[0]).norm() < 1e-12));
    }

    #[test]
    fn antialias_edge_cases() {
        assert!(design_antialias(960.0, 960.0).unwrap().is_identity());
        match design_antialias_with_budget(60.0, 960.0, 101) {
            Err(Error::FilterTooLong { required, budget }) => {
                assert_eq!(budget, 101);
                assert!(required > 101);
            }
            other => panic!("expected FilterTooLong, got {other:?}"),
        }
        assert!(design_antialias(70.0, 960.0).is_err());
    }

    #[test]
    fn antialias_delays_nothing() {
        // filtered frames should follow the image-free oscillation, undelayed
        let w = WaveformSpec::default();
        let x = synthesize(&w, &ModulationSpec::magnitude(0.05, 2.0)).unwrap();
        let win = WindowSpec::new(1, 16).unwrap();
        let r = ReportingSpec::new(60.0, 960.0).unwrap().with_antialias().unwrap();
        let s = estimate_phasors(&x, &win, &r).unwrap();
        let lambda = TAU * 2.0 / 960.0;
        let g = crate::response::h1(lambda, 16);
        let amp = g.gain * SQRT_2 * 0.05 / 2.0;
        assert!(s.frames[0].index >= r.antialias.as_ref().unwrap().group_delay() as i64);
        for f in &s.frames {
            let expected = 1.0 + amp * (lambda * f.index as f64 + g.theta).sin();
            assert!((f.value.norm() - expected).abs() < 1e-4, "frame {}", f.index);
        }
    }

    #[test]
    fn csv_round_trip() {
        let x = synthesize(
            &WaveformSpec::default().with_duration(400),
            &ModulationSpec::magnitude(0.1, 5.0),
        )
        .unwrap();
        let s = estimate_phasors(
            &x,
            &WindowSpec::new(2, 16).unwrap(),
            &ReportingSpec::new(240.0, 960.0).unwrap(),
        )
        .unwrap();
        let back = PhasorStream::from_csv(&s.to_csv(), s.metadata.clone()).unwrap();
        assert_eq!(back.frames, s.frames);
        assert_eq!(back.window, s.window);
        assert_eq!(back.fps, 240.0);
    }

    proptest! {
        #[test]
        fn single_expression_dft_matches_demodulate_then_average(
            samples in proptest::collection::vec(-2.0..2.0f64, 160..260),
            h in 1usize..5,
            start in 0i64..1000,
        ) {
            let x = Waveform { samples, fs: 960.0, f0: 60.0, start_index: start, metadata: Metadata::new() };
            let w = WindowSpec::new(h, 16).unwrap();
            prop_assume!(x.len() >= w.len());
            let s = estimate_phasors(&x, &w, &ReportingSpec::every_sample(960.0)).unwrap();
            for (i, f) in s.frames.iter().enumerate() {
                let direct = windowed_dft(&x, i, w.len(), w.bin()).unwrap();
                prop_assert!((direct - f.value).norm() < 1e-12);
            }
        }
    }
}
