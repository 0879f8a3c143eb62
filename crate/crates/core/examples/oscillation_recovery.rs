//! Measures an oscillation through the estimator, then undoes the estimator's
//! gain and phase to get back the injected modulation. Also shows the error
//! reported at a comb null.

use pmulab::analysis::DEFAULT_GAIN_FLOOR;
use pmulab::{analyze, Channel, ModulationSpec, ReportingSpec, WaveformSpec, WindowSpec};

fn main() -> pmulab::Result<()> {
    let w = WaveformSpec::default().with_duration_secs(4.0);
    let reporting = ReportingSpec::new(240.0, w.fs)?;
    let window = WindowSpec::new(8, 16)?;

    for (m, channel) in [
        (ModulationSpec::magnitude(0.02, 12.0).with_phim(0.4), Channel::Magnitude),
        (ModulationSpec::phase(0.03, 5.0).with_phim(-1.0), Channel::Angle),
    ] {
        let x = pmulab::synthesize(&w, &m)?;
        let stream = pmulab::estimate_phasors(&x, &window, &reporting)?;
        let report = analyze(&stream, channel, None, DEFAULT_GAIN_FLOOR)?;
        let truth = match channel {
            Channel::Magnitude => m.index * w.v_rms,
            Channel::Angle => m.index,
        };
        println!("{channel}: fm estimated {:.4} Hz", report.estimate.fm);
        println!(
            "  measured  A={:.6e} phi={:+.4} rad  (G={:.4}, theta={:.2} deg)",
            report.estimate.amplitude,
            report.estimate.phase,
            report.gain.gain,
            report.gain.theta_deg()
        );
        let rec = report.recovered?;
        println!("  recovered A={:.6e} phi={:+.4} rad", rec.amplitude, rec.phase);
        println!("  injected  A={truth:.6e} phi={:+.4} rad", m.phim);
    }

    let m = ModulationSpec::magnitude(0.01, 15.0);
    let x = pmulab::synthesize(&w, &m)?;
    let stream = pmulab::estimate_phasors(&x, &window, &reporting)?;
    let report = analyze(&stream, Channel::Magnitude, Some(15.0), DEFAULT_GAIN_FLOOR)?;
    match report.recovered {
        Ok(_) => println!("15 Hz recovered (unexpected)"),
        Err(e) => println!("15 Hz with h=8: {e}"),
    }
    Ok(())
}
