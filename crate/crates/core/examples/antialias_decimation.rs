//! Compares 60 fps reporting with and without the anti-alias filter against
//! the closed-form prediction.

use pmulab::estimator::check_antialias;
use pmulab::{
    design_antialias, measure_oscillation, predict_oscillation, ModulationSpec, ReportingSpec, WaveformSpec, WindowSpec,
};

fn main() -> pmulab::Result<()> {
    let w = WaveformSpec::default().with_duration_secs(4.0);
    let filter = design_antialias(60.0, w.fs)?;
    let (ripple, stop) = check_antialias(&filter, 60.0);
    let stop_db = -20.0 * stop.log10();
    println!(
        "filter: {} taps, cutoff {} Hz, passband ripple {ripple:.2e}, stopband attenuation {stop_db:.1} dB",
        filter.taps.len(),
        filter.cutoff
    );

    let window = WindowSpec::new(4, 16)?;
    println!(
        "{:>5} {:>14} {:>14} {:>14}",
        "fm", "predicted A", "raw 60 fps", "filtered"
    );
    for fm in [2.0, 5.0, 10.0, 17.5, 20.0] {
        let m = ModulationSpec::magnitude(0.01, fm);
        let p = predict_oscillation(&w, &m, &window)?;
        let raw = ReportingSpec::new(60.0, w.fs)?;
        let filtered = ReportingSpec::new(60.0, w.fs)?.with_filter(filter.clone())?;
        let (_, a) = measure_oscillation(&w, &m, &window, &raw)?;
        let (_, b) = measure_oscillation(&w, &m, &window, &filtered)?;
        println!(
            "{fm:>5} {:>14.6e} {:>14.6e} {:>14.6e}",
            p.amplitude, a.amplitude, b.amplitude
        );
    }
    Ok(())
}
