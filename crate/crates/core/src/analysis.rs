//! Oscillation extraction from phasor streams and inversion of the window response.

use std::f64::consts::{PI, SQRT_2, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::estimator::{PhasorStream, TimestampConvention, WindowSpec};
use crate::format::{self, fmt_float};
use crate::response::{h1, wrap_deg_360, wrap_pi, Channel, ComplexGain, PredictedOscillation};

/// Default lower bound on `G` below which recovery is refused.
pub const DEFAULT_GAIN_FLOOR: f64 = 1e-3;

/// Measured `A·sin(2π·fm·t + φ) + c` on one phasor channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationEstimate {
    pub channel: Channel,
    pub fm: f64,
    /// Channel units: RMS p.u. or rad.
    pub amplitude: f64,
    /// rad, in `(-π, π]`.
    pub phase: f64,
    pub dc_offset: f64,
    pub residual_rms: f64,
    pub frames_used: usize,
}

impl OscillationEstimate {
    /// The estimate a perfect measurement of `p` would produce.
    pub fn from_prediction(p: &PredictedOscillation) -> Self {
        Self {
            channel: p.channel,
            fm: p.fm,
            amplitude: p.amplitude,
            phase: wrap_pi(p.phase),
            dc_offset: 0.0,
            residual_rms: 0.0,
            frames_used: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveredOscillation {
    pub amplitude: f64,
    /// rad, in `(-π, π]`.
    pub phase: f64,
    pub gain_used: ComplexGain,
}

/// Successive-difference unwrapping with a π threshold.
pub fn unwrap(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &a in angles {
        if let Some(p) = prev {
            let d = a - p;
            if d > PI {
                offset -= TAU * ((d + PI) / TAU).floor();
            } else if d < -PI {
                offset += TAU * ((-d + PI) / TAU).floor();
            }
        }
        out.push(a + offset);
        prev = Some(a);
    }
    out
}

/// Per-frame signal of `channel`: `|X̂|` or the unwrapped `∠X̂`.
pub fn channel_signal(stream: &PhasorStream, channel: Channel) -> Vec<f64> {
    match channel {
        Channel::Magnitude => stream.values().map(|v| v.norm()).collect(),
        Channel::Angle => unwrap(&stream.values().map(|v| v.arg()).collect::<Vec<_>>()),
    }
}

/// Dominant oscillation frequency of `stream`'s channel signal.
pub fn estimate_fm(stream: &PhasorStream, channel: Channel) -> Result<f64> {
    estimate_frequency(&channel_signal(stream, channel), stream.fps)
}

/// Peak of the Hann-windowed, zero-padded magnitude spectrum of the mean-removed
/// signal, refined by a parabola through the log magnitudes of three bins.
pub fn estimate_frequency(signal: &[f64], rate: f64) -> Result<f64> {
    let n = signal.len();
    if n < 4 {
        return Err(Error::NoOscillation);
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let spread = signal.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max);
    if spread <= 1e-12 * mean.abs().max(1.0) {
        return Err(Error::NoOscillation);
    }
    let nfft = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = signal
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let hann = 0.5 - 0.5 * (TAU * i as f64 / (n - 1) as f64).cos();
            Complex64::new((s - mean) * hann, 0.0)
        })
        .collect();
    buf.resize(nfft, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let mag: Vec<f64> = buf[..=nfft / 2].iter().map(|c| c.norm()).collect();

    let peak = (1..mag.len() - 1)
        .filter(|&k| mag[k] >= mag[k - 1] && mag[k] >= mag[k + 1])
        .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
        .ok_or(Error::NoOscillation)?;
    let floor = mag.iter().cloned().fold(0.0, f64::max) * 1e-12;
    if mag[peak] <= floor || mag[peak] == 0.0 {
        return Err(Error::NoOscillation);
    }
    let (a, b, c) = (mag[peak - 1].ln(), mag[peak].ln(), mag[peak + 1].ln());
    let denom = a - 2.0 * b + c;
    let delta = if denom.abs() > 0.0 && denom.is_finite() {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Ok((peak as f64 + delta) * rate / nfft as f64)
}

/// Linear least squares `s ≈ a·sin(2π·fm·t) + b·cos(2π·fm·t) + c`.
///
/// Returns `(A, φ, c, residual_rms)` with `A = √(a²+b²)`, `φ = atan2(b, a)`.
pub fn fit_samples(times: &[f64], values: &[f64], fm: f64) -> Result<(f64, f64, f64, f64)> {
    let n = times.len();
    if n != values.len() || n < 3 || !(fm.is_finite() && fm > 0.0) {
        return Err(Error::RankDeficient { fm });
    }
    let w = TAU * fm;
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => (w * times[i]).sin(),
        1 => (w * times[i]).cos(),
        _ => 1.0,
    });
    let rhs = DVector::from_column_slice(values);
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if smax.is_nan() || smax <= 0.0 || smin / smax < 1e-10 {
        return Err(Error::RankDeficient { fm });
    }
    let coef = svd.solve(&rhs, 0.0).map_err(|_| Error::RankDeficient { fm })?;
    let residual = &design * &coef - rhs;
    let rms = (residual.norm_squared() / n as f64).sqrt();
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    let mut phase = b.atan2(a);
    if phase <= -PI {
        phase = PI;
    }
    Ok((a.hypot(b), phase, c, rms))
}

/// Least-squares sinusoid fit at known `fm` on frame timestamps.
///
/// Frames within one window length of either end of the stream are excluded
/// when enough frames remain.
pub fn fit_sinusoid(stream: &PhasorStream, channel: Channel, fm: f64) -> Result<OscillationEstimate> {
    let signal = channel_signal(stream, channel);
    let keep = trimmed_range(stream);
    let times: Vec<f64> = stream.frames[keep.clone()].iter().map(|f| f.timestamp_s).collect();
    let (amplitude, phase, dc_offset, residual_rms) = fit_samples(&times, &signal[keep.clone()], fm)?;
    Ok(OscillationEstimate {
        channel,
        fm,
        amplitude,
        phase,
        dc_offset,
        residual_rms,
        frames_used: keep.len(),
    })
}

fn trimmed_range(stream: &PhasorStream) -> std::ops::Range<usize> {
    let n = stream.frames.len();
    if n == 0 {
        return 0..0;
    }
    let len = stream.window.len() as i64;
    let first = stream.frames[0].index + len;
    let last = stream.frames[n - 1].index - len;
    let lo = stream.frames.iter().position(|f| f.index >= first).unwrap_or(n);
    let hi = stream.frames.iter().rposition(|f| f.index <= last).map_or(0, |i| i + 1);
    if hi > lo && hi - lo >= 8 {
        lo..hi
    } else {
        0..n
    }
}

/// Window gain as seen on a stream with `window`'s timestamp convention.
///
/// Center stamping shifts the time axis by `(L-1)/2` samples, which removes the
/// linear-phase part of `θ` and leaves only the sign of the real kernel.
pub fn effective_gain(fm: f64, window: &WindowSpec, fs: f64) -> ComplexGain {
    let omega = TAU * fm / fs;
    let mut g = h1(omega, window.len());
    if window.timestamp == TimestampConvention::Center && !g.is_null() {
        g.theta = wrap_pi(g.theta - omega * (window.len() as f64 - 1.0) / 2.0);
        g.value = Complex64::from_polar(g.gain, g.theta);
    }
    g
}

pub fn recover(est: &OscillationEstimate, window: &WindowSpec, fs: f64) -> Result<RecoveredOscillation> {
    recover_with_floor(est, window, fs, DEFAULT_GAIN_FLOOR)
}

/// Undoes the window response: `A_rec = √2·A/G`, `φ_rec = φ - θ`.
pub fn recover_with_floor(
    est: &OscillationEstimate,
    window: &WindowSpec,
    fs: f64,
    floor: f64,
) -> Result<RecoveredOscillation> {
    let gain = effective_gain(est.fm, window, fs);
    if gain.is_null() {
        return Err(Error::CombNull { fm: est.fm });
    }
    if gain.gain < floor {
        return Err(Error::IllConditioned {
            fm: est.fm,
            gain: gain.gain,
            floor,
        });
    }
    Ok(RecoveredOscillation {
        amplitude: SQRT_2 * est.amplitude / gain.gain,
        phase: wrap_pi(est.phase - gain.theta),
        gain_used: gain,
    })
}

/// Fit plus recovery for one channel of a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub estimate: OscillationEstimate,
    pub gain: ComplexGain,
    pub recovered: std::result::Result<RecoveredOscillation, Error>,
}

/// Fits `channel` at `fm` (estimated from the spectrum when `None`) and attempts recovery.
pub fn analyze(stream: &PhasorStream, channel: Channel, fm: Option<f64>, floor: f64) -> Result<AnalysisReport> {
    let fm = match fm {
        Some(f) => f,
        None => estimate_fm(stream, channel)?,
    };
    let estimate = fit_sinusoid(stream, channel, fm)?;
    Ok(AnalysisReport {
        estimate,
        gain: effective_gain(fm, &stream.window, stream.fs),
        recovered: recover_with_floor(&estimate, &stream.window, stream.fs, floor),
    })
}

pub const REPORT_CSV_HEADER: &str =
    "channel,fm_hz,A_meas,phi_meas_deg,A_rec,phi_rec_deg,G,theta_deg,residual_rms,recoverable";

/// Report rows; angle-channel amplitudes and residuals are given in degrees.
pub fn report_csv(reports: &[AnalysisReport]) -> String {
    let digits = format::precision_digits();
    let f = |x: f64| fmt_float(x, digits);
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let e = &r.estimate;
        let unit = |x: f64| match e.channel {
            Channel::Magnitude => x,
            Channel::Angle => x.to_degrees(),
        };
        let (a_rec, phi_rec, ok) = match &r.recovered {
            Ok(rec) => (f(unit(rec.amplitude)), f(wrap_deg_360(rec.phase.to_degrees())), true),
            Err(_) => (String::new(), String::new(), false),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            e.channel,
            f(e.fm),
            f(unit(e.amplitude)),
            f(wrap_deg_360(e.phase.to_degrees())),
            a_rec,
            phi_rec,
            f(r.gain.gain),
            f(r.gain.theta_deg()),
            f(unit(e.residual_rms)),
            ok
        ));
    }
    out
}
