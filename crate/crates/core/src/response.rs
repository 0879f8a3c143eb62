//! Closed-form frequency response of the rectangular-window phasor estimator.
//!
//! Averaging the demodulated signal over `L` samples maps a complex exponential
//! `e^{jλp}` to `e^{jλm}·H1(e^{jλ})` with
//!
//! ```text
//! H1(e^{jλ}) = (√2/L)·Σ_{n=0}^{L-1} e^{jλn} = (√2/L)·e^{jλ(L-1)/2}·sin(Lλ/2)/sin(λ/2)
//! ```
//!
//! The angle of the full complex value is used everywhere, so the extra π where
//! the real Dirichlet kernel changes sign comes out without special casing.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimator::WindowSpec;
use crate::format::{self, fmt_float};
use crate::signal::{ModulationKind, ModulationSpec, WaveformSpec};

/// `|sin(λ/2)|` below this is treated as the DC singularity.
pub const DC_GUARD: f64 = 1e-9;
/// `|sin(Lλ/2)|` below this (away from DC) is treated as an exact comb null.
pub const NULL_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainClass {
    Dc,
    Null,
    Regular,
}

impl fmt::Display for GainClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GainClass::Dc => "dc",
            GainClass::Null => "null",
            GainClass::Regular => "regular",
        })
    }
}

/// `H1(e^{jλ})` for a window of `len` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGain {
    /// Normalized angular frequency, rad/sample.
    pub lambda: f64,
    pub len: usize,
    pub value: Complex64,
    /// `|H1|`.
    pub gain: f64,
    /// Principal-value angle of `H1`, rad.
    pub theta: f64,
    pub class: GainClass,
}

impl ComplexGain {
    /// θ in degrees, wrapped to `[0, 360)`.
    pub fn theta_deg(&self) -> f64 {
        wrap_deg_360(self.theta.to_degrees())
    }

    pub fn is_null(&self) -> bool {
        self.class == GainClass::Null
    }
}

/// Wraps an angle in degrees to `[0, 360)`.
pub fn wrap_deg_360(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Wraps an angle in radians to `(-π, π]`.
pub fn wrap_pi(rad: f64) -> f64 {
    let w = (rad + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Closed-form `H1(e^{jλ})` with the removable singularity at `λ ≡ 0 (mod 2π)` taken by limit.
pub fn h1(lambda: f64, len: usize) -> ComplexGain {
    assert!(len >= 1, "window length must be at least one sample");
    let l = len as f64;
    // H1 is 2π-periodic; reduce so the singularity sits at delta = 0
    let delta = lambda - TAU * (lambda / TAU).round();
    let half_sin = (0.5 * delta).sin();
    let num = (0.5 * l * delta).sin();

    let (kernel, class) = if half_sin.abs() < DC_GUARD {
        // sin(Lx)/sin(x) = L·(1 - (L²-1)x²/6 + O(x⁴)), x = delta/2
        let x2 = 0.25 * delta * delta;
        (l * (1.0 - (l * l - 1.0) * x2 / 6.0), GainClass::Dc)
    } else if num.abs() < NULL_GUARD {
        (0.0, GainClass::Null)
    } else {
        (num / half_sin, GainClass::Regular)
    };

    let value = if class == GainClass::Null {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::from_polar(SQRT_2 / l * kernel, 0.5 * delta * (l - 1.0))
    };
    ComplexGain {
        lambda,
        len,
        value,
        gain: value.norm(),
        theta: if class == GainClass::Null { 0.0 } else { value.arg() },
        class,
    }
}

/// Literal `O(L)` summation of `(√2/L)·Σ e^{jλn}`; oracle for [`h1`].
pub fn h1_bruteforce(lambda: f64, len: usize) -> Complex64 {
    let sum: Complex64 = (0..len).map(|n| Complex64::from_polar(1.0, lambda * n as f64)).sum();
    sum * (SQRT_2 / len as f64)
}

/// Comb-null frequencies `q·fs/L` in `(0, f_max]`.
pub fn comb_nulls(len: usize, fs: f64, f_max: f64) -> Result<Vec<f64>> {
    if len == 0 {
        return Err(Error::InvalidParameter {
            name: "len",
            reason: "window length must be >= 1".into(),
        });
    }
    if f_max.is_nan() || f_max >= fs / 2.0 {
        return Err(Error::InvalidParameter {
            name: "f_max",
            reason: format!("{f_max} Hz is not below fs/2 = {} Hz", fs / 2.0),
        });
    }
    let spacing = fs / len as f64;
    let q_max = (f_max / spacing + 1e-9).floor().max(0.0) as usize;
    Ok((1..=q_max)
        .filter(|q| q % len != 0)
        .map(|q| q as f64 * spacing)
        .collect())
}

/// One rotating exponential `coeff·e^{jλp}` of the demodulated signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasebandTerm {
    pub lambda: f64,
    pub coeff: Complex64,
    pub label: &'static str,
}

/// Demodulated signal `y[p] = dc + Σ coeff_i·e^{jλ_i p}`.
///
/// `dc` is the coefficient of the constant term of `y[p]` itself, `√2·V/2·e^{jφ0}`;
/// the phasor-domain constant `C0 = V·e^{jφ0}` is [`BasebandDecomposition::phasor_dc`].
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandDecomposition {
    pub dc: Complex64,
    /// Ordered as: `-2ω0`, `+Ωm`, `-Ωm`, `-2ω0-Ωm`, `-2ω0+Ωm`.
    pub terms: [BasebandTerm; 5],
}

impl BasebandDecomposition {
    /// `H1(0)·dc`, the phasor's constant part.
    pub fn phasor_dc(&self) -> Complex64 {
        self.dc * SQRT_2
    }

    /// Evaluates the decomposition at sample index `p`.
    pub fn eval(&self, p: f64) -> Complex64 {
        self.terms.iter().fold(self.dc, |acc, t| {
            acc + t.coeff * Complex64::from_polar(1.0, t.lambda * p)
        })
    }

    pub fn term(&self, label: &str) -> Option<&BasebandTerm> {
        self.terms.iter().find(|t| t.label == label)
    }
}

/// Splits the demodulated signal into DC plus five exponentials; linearized in β for phase modulation.
pub fn decompose_baseband(w: &WaveformSpec, m: &ModulationSpec) -> Result<BasebandDecomposition> {
    w.validate()?;
    m.validate()?;
    let half = SQRT_2 * w.v_rms / 2.0;
    // side-band scale: √2Vα/(4j) for magnitude, √2Vβ/4 for phase
    let side = match m.kind {
        ModulationKind::None => return Err(Error::Unmodulated),
        ModulationKind::Magnitude => Complex64::new(0.0, -SQRT_2 * w.v_rms * m.index / 4.0),
        ModulationKind::Phase => Complex64::new(SQRT_2 * w.v_rms * m.index / 4.0, 0.0),
    };
    // image side-bands of the conjugate carrier term: 1 - jβ·sin(·) flips their sign
    // relative to magnitude modulation
    let image = match m.kind {
        ModulationKind::Phase => -side,
        _ => side,
    };
    let omega0 = w.omega0();
    let omega_m = m.omega_m(w.fs);
    let (phi0, phim) = (w.phi0, m.phim);
    let cis = |a: f64| Complex64::from_polar(1.0, a);
    Ok(BasebandDecomposition {
        dc: half * cis(phi0),
        terms: [
            BasebandTerm {
                lambda: -2.0 * omega0,
                coeff: half * cis(-phi0),
                label: "-2w0",
            },
            BasebandTerm {
                lambda: omega_m,
                coeff: side * cis(phi0 + phim),
                label: "+Wm",
            },
            BasebandTerm {
                lambda: -omega_m,
                coeff: -side * cis(phi0 - phim),
                label: "-Wm",
            },
            BasebandTerm {
                lambda: -2.0 * omega0 - omega_m,
                coeff: -image * cis(-(phi0 + phim)),
                label: "-2w0-Wm",
            },
            BasebandTerm {
                lambda: -2.0 * omega0 + omega_m,
                coeff: image * cis(-(phi0 - phim)),
                label: "-2w0+Wm",
            },
        ],
    })
}

/// Which phasor quantity carries the oscillation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// `|X̂|`, RMS per unit.
    Magnitude,
    /// Unwrapped `∠X̂`, rad.
    Angle,
}

impl Channel {
    pub fn for_kind(kind: ModulationKind) -> Option<Self> {
        match kind {
            ModulationKind::Magnitude => Some(Channel::Magnitude),
            ModulationKind::Phase => Some(Channel::Angle),
            ModulationKind::None => None,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Magnitude => "magnitude",
            Channel::Angle => "angle",
        })
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "magnitude" | "mag" => Ok(Channel::Magnitude),
            "angle" | "phase" => Ok(Channel::Angle),
            other => Err(Error::Parse(format!("unknown channel {other:?}"))),
        }
    }
}

/// Oscillation expected in the phasor output: `amplitude·sin(Ωm·t + phase)` on `channel`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedOscillation {
    pub channel: Channel,
    /// RMS per unit (magnitude) or rad (angle).
    pub amplitude: f64,
    /// `φm + θ`, rad.
    pub phase: f64,
    pub fm: f64,
    pub gain: ComplexGain,
}

/// Predicts the oscillation seen on the left-edge-stamped phasor stream.
pub fn predict_oscillation(w: &WaveformSpec, m: &ModulationSpec, window: &WindowSpec) -> Result<PredictedOscillation> {
    w.validate()?;
    m.validate()?;
    let channel = Channel::for_kind(m.kind).ok_or(Error::Unmodulated)?;
    let gain = h1(m.omega_m(w.fs), window.len());
    let amplitude = match channel {
        Channel::Magnitude => gain.gain * SQRT_2 * w.v_rms * m.index / 2.0,
        Channel::Angle => gain.gain * SQRT_2 * m.index / 2.0,
    };
    Ok(PredictedOscillation {
        channel,
        amplitude,
        phase: m.phim + gain.theta,
        fm: m.fm,
        gain,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseRow {
    pub fm: f64,
    pub h: usize,
    pub len: usize,
    pub gain: ComplexGain,
}

/// Evaluates `H1` at `Ωm = 2π·fm/fs` for every `(fm, h)` pair, `fm` outer.
pub fn response_curve(h_list: &[usize], fs: f64, n_per_cycle: usize, f_grid: &[f64]) -> Result<Vec<ResponseRow>> {
    if let Some(&h) = h_list.iter().find(|&&h| h == 0) {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!("window cycles must be >= 1, got {h}"),
        });
    }
    if n_per_cycle == 0 {
        return Err(Error::InvalidParameter {
            name: "n_per_cycle",
            reason: "must be >= 1".into(),
        });
    }
    if let Some(&f) = f_grid.iter().find(|&&f| !(f > 0.0 && f < fs / 2.0)) {
        return Err(Error::InvalidParameter {
            name: "fm",
            reason: format!("{f} Hz outside (0, fs/2)"),
        });
    }
    let mut rows = Vec::with_capacity(h_list.len() * f_grid.len());
    for &fm in f_grid {
        for &h in h_list {
            let len = h * n_per_cycle;
            rows.push(ResponseRow {
                fm,
                h,
                len,
                gain: h1(TAU * fm / fs, len),
            });
        }
    }
    Ok(rows)
}

/// Uniform grid `start, start+step, …, ≤ stop`, snapped to 1e-9 to keep decimal steps exact.
pub fn frequency_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || stop.is_nan() || start.is_nan() || stop < start {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("need step > 0 and stop >= start (start={start}, stop={stop}, step={step})"),
        });
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

pub const RESPONSE_CSV_HEADER: &str = "fm_hz,h,L,G,theta_deg,classification";

pub fn response_csv(rows: &[ResponseRow]) -> String {
    let digits = format::precision_digits();
    let mut out = String::from(RESPONSE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_float(r.fm, digits),
            r.h,
            r.len,
            fmt_float(r.gain.gain, digits),
            fmt_float(r.gain.theta_deg(), digits),
            r.gain.class
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn dc_gain_is_root_two() {
        for len in [1, 7, 16, 128] {
            let g = h1(0.0, len);
            assert_eq!(g.class, GainClass::Dc);
            assert!((g.value - Complex64::new(SQRT_2, 0.0)).norm() < 1e-15);
            assert!((h1_bruteforce(0.0, len) - g.value).norm() < 1e-14);
        }
        assert_eq!(h1(TAU, 16).class, GainClass::Dc);
    }

    #[test]
    fn carrier_image_is_nulled() {
        let g = h1(-2.0 * TAU / 16.0, 16);
        assert_eq!(g.class, GainClass::Null);
        assert_eq!(g.gain, 0.0);
    }

    #[test]
    fn twenty_hertz_single_cycle() {
        let lambda = TAU * 20.0 / 960.0;
        let g = h1(lambda, 16);
        let oracle = h1_bruteforce(lambda, 16);
        // frozen from the literal 16-term sum
        assert!((oracle.norm() - 1.170_380_612_716_852_6).abs() < 1e-13);
        assert!(close(g.value, oracle, 1e-13));
        assert!((g.theta_deg() - 56.25).abs() < 1e-10);
        assert_eq!(g.class, GainClass::Regular);
    }

    #[test]
    fn fifteen_hertz_is_null_for_four_cycles() {
        let g = h1(TAU * 15.0 / 960.0, 64);
        assert_eq!(g.class, GainClass::Null);
        assert_eq!(g.gain, 0.0);
    }

    #[test]
    fn bruteforce_trivial_cases() {
        assert!(h1_bruteforce(PI, 2).norm() < 1e-16);
        assert!((h1_bruteforce(0.0, 7) - Complex64::new(SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn phase_flip_appears_in_theta() {
        // h = 4 at 20 Hz: kernel is negative, raw linear phase 236.25° flips to 56.25°
        let g = h1(TAU * 20.0 / 960.0, 64);
        assert!((g.theta_deg() - 56.25).abs() < 1e-10);
        let g = h1(TAU * 20.0 / 960.0, 128);
        assert!((g.theta_deg() - 116.25).abs() < 1e-10);
    }

    #[test]
    fn comb_null_lists() {
        assert_eq!(comb_nulls(64, 960.0, 30.0).unwrap(), vec![15.0, 30.0]);
        assert_eq!(comb_nulls(128, 960.0, 30.0).unwrap(), vec![7.5, 15.0, 22.5, 30.0]);
        assert!(comb_nulls(16, 960.0, 30.0).unwrap().is_empty());
        assert!(comb_nulls(16, 960.0, 480.0).is_err());
        for f in comb_nulls(128, 960.0, 400.0).unwrap() {
            assert!(h1(TAU * f / 960.0, 128).is_null(), "{f} Hz");
        }
    }

    #[test]
    fn magnitude_decomposition_coefficients() {
        let w = WaveformSpec::default();
        let d = decompose_baseband(&w, &ModulationSpec::magnitude(0.01, 20.0)).unwrap();
        let plus = d.term("+Wm").unwrap().coeff;
        let expected = Complex64::new(SQRT_2 * 0.01, 0.0) / Complex64::new(0.0, 4.0);
        assert!(close(plus, expected, 1e-18));
        assert!(close(d.phasor_dc(), Complex64::new(1.0, 0.0), 1e-15));

        let flat = decompose_baseband(&w.with_phi0(0.4), &ModulationSpec::magnitude(0.0, 20.0)).unwrap();
        for t in &flat.terms[1..] {
            assert_eq!(t.coeff.norm(), 0.0);
        }
        assert!(flat.terms[0].coeff.norm() > 0.0);
        assert!(close(flat.phasor_dc(), Complex64::from_polar(1.0, 0.4), 1e-15));

        assert_eq!(decompose_baseband(&w, &ModulationSpec::none()), Err(Error::Unmodulated));
    }

    #[test]
    fn decomposition_reconstructs_demodulated_signal() {
        use crate::estimator::demodulate;
        use crate::signal::synthesize;
        let w = WaveformSpec::default().with_phi0(0.9).with_duration(500);
        let win = WindowSpec::new(1, 16).unwrap();
        let m = ModulationSpec::magnitude(0.2, 13.0).with_phim(-0.4);
        let y = demodulate(&synthesize(&w, &m).unwrap(), &win).unwrap();
        let d = decompose_baseband(&w, &m).unwrap();
        for (p, yp) in y.iter().enumerate() {
            assert!((yp - d.eval(p as f64)).norm() < 1e-12);
        }
        // phase: error is second order in beta
        let m = ModulationSpec::phase(0.01, 13.0).with_phim(-0.4);
        let y = demodulate(&synthesize(&w, &m).unwrap(), &win).unwrap();
        let d = decompose_baseband(&w, &m).unwrap();
        for (p, yp) in y.iter().enumerate() {
            assert!((yp - d.eval(p as f64)).norm() < SQRT_2 * 0.01 * 0.01 / 2.0 + 1e-12);
        }
    }

    #[test]
    fn predictions_at_twenty_hertz() {
        let w = WaveformSpec::default();
        let p = predict_oscillation(
            &w,
            &ModulationSpec::magnitude(0.01, 20.0),
            &WindowSpec::new(1, 16).unwrap(),
        )
        .unwrap();
        assert_eq!(p.channel, Channel::Magnitude);
        assert!((p.amplitude - 0.008276).abs() < 5e-7);
        assert!((p.gain.theta_deg() - 56.25).abs() < 1e-9);

        let p = predict_oscillation(&w, &ModulationSpec::phase(0.02, 20.0), &WindowSpec::new(8, 16).unwrap()).unwrap();
        assert_eq!(p.channel, Channel::Angle);
        assert!((p.amplitude.to_degrees() - 0.1185).abs() < 5e-4);
        assert!((wrap_deg_360(p.phase.to_degrees()) - 116.25).abs() < 1e-9);

        let p = predict_oscillation(&w, &ModulationSpec::phase(0.05, 15.0), &WindowSpec::new(4, 16).unwrap()).unwrap();
        assert_eq!(p.amplitude, 0.0);
    }

    #[test]
    fn response_curve_shape() {
        let grid = frequency_grid(0.1, 30.0, 0.1).unwrap();
        assert_eq!(grid.len(), 300);
        assert_eq!(grid[149], 15.0);
        let rows = response_curve(&[1, 2, 4, 8], 960.0, 16, &grid).unwrap();
        assert_eq!(rows.len(), 1200);
        let at = |fm: f64, h: usize| rows.iter().find(|r| r.fm == fm && r.h == h).unwrap().gain;
        assert!(at(15.0, 4).is_null() && at(15.0, 8).is_null());
        assert!(!at(15.0, 1).is_null() && !at(15.0, 2).is_null());
        for h in [1, 2, 4, 8] {
            assert!((at(0.1, h).gain / SQRT_2 - 1.0).abs() < 1e-3);
            assert!(at(0.1, h).theta.abs() < 0.1);
        }
        let g: Vec<f64> = [1, 2, 4, 8].iter().map(|&h| at(20.0, h).gain).collect();
        assert!(g[3] < g[2] && g[2] < g[1] && g[1] < g[0]);
        assert!(response_curve(&[1], 960.0, 16, &[480.0]).is_err());
        assert!(response_curve(&[0], 960.0, 16, &[1.0]).is_err());
    }

    #[test]
    fn wrapping_helpers() {
        assert_eq!(wrap_pi(-PI), PI);
        assert!((wrap_pi(3.0 * PI) - PI).abs() < 1e-15);
        assert_eq!(wrap_deg_360(-0.0), 0.0);
        assert_eq!(wrap_deg_360(360.0), 0.0);
        assert!((wrap_deg_360(-90.0) - 270.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn closed_form_matches_sum(lambda in -PI..PI, len in 1usize..300) {
            let g = h1(lambda, len);
            prop_assert!(close(g.value, h1_bruteforce(lambda, len), 1e-12));
            prop_assert!(g.gain <= SQRT_2 * (1.0 + 1e-15));
        }

        #[test]
        fn conjugate_symmetric(lambda in -PI..PI, len in 1usize..300) {
            prop_assert!(close(h1(-lambda, len).value, h1(lambda, len).value.conj(), 1e-14));
        }

        #[test]
        fn theta_is_linear_phase_plus_flip(lambda in 1e-3..PI, len in 2usize..300) {
            let g = h1(lambda, len);
            prop_assume!(g.class == GainClass::Regular);
            let kernel = (len as f64 * lambda / 2.0).sin() / (lambda / 2.0).sin();
            let flip = if kernel < 0.0 { PI } else { 0.0 };
            let expected = wrap_pi(lambda * (len as f64 - 1.0) / 2.0 + flip);
            prop_assert!(wrap_pi(g.theta - expected).abs() < 1e-9);
        }
    }
}
