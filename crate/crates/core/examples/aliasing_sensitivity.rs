//! Without an anti-alias filter, the 60 fps frames pick up image components
//! folded onto fm. Their contribution depends on the carrier phase and on
//! which input sample the decimation starts at. This sweeps both.

use pmulab::response::predict_oscillation;
use pmulab::{measure_oscillation, ModulationSpec, ReportingSpec, WaveformSpec, WindowSpec};

fn main() -> pmulab::Result<()> {
    let m = ModulationSpec::magnitude(0.01, 20.0);
    let window = WindowSpec::new(8, 16)?;
    let base = WaveformSpec::default();
    let p = predict_oscillation(&base, &m, &window)?;
    println!("theory: A={:.6e} theta={:.3} deg", p.amplitude, p.gain.theta_deg());
    println!(
        "{:>10} {:>6} {:>14} {:>12}",
        "phi0 deg", "phase", "A_meas", "phi_meas deg"
    );
    for phi0_deg in [0.0f64, 30.0, 60.0, 90.0] {
        let w = base.with_phi0(phi0_deg.to_radians());
        for phase in [0, 4, 8] {
            let r = ReportingSpec::new(60.0, w.fs)?.with_decimation_phase(phase)?;
            let (_, est) = measure_oscillation(&w, &m, &window, &r)?;
            println!(
                "{phi0_deg:>10} {phase:>6} {:>14.6e} {:>12.3}",
                est.amplitude,
                est.phase.to_degrees().rem_euclid(360.0)
            );
        }
    }
    Ok(())
}
