//! Runs the windowed-DFT estimator over a magnitude-modulated carrier and
//! prints the first frames for both timestamp conventions.

use pmulab::{
    estimate_phasors, synthesize, ModulationSpec, ReportingSpec, TimestampConvention, WaveformSpec, WindowSpec,
};

fn main() -> pmulab::Result<()> {
    let w = WaveformSpec::default().with_duration_secs(0.5);
    let x = synthesize(&w, &ModulationSpec::magnitude(0.01, 20.0))?;
    let reporting = ReportingSpec::new(240.0, w.fs)?;

    for ts in [TimestampConvention::LeftEdge, TimestampConvention::Center] {
        let window = WindowSpec::new(4, w.samples_per_cycle()?)?.with_timestamp(ts);
        let stream = estimate_phasors(&x, &window, &reporting)?;
        println!("{ts:?}: L = {}, {} frames", window.len(), stream.len());
        for f in stream.frames.iter().take(5) {
            println!(
                "  m={:>4} t={:.6} |X|={:.9} angle={:+.3e} rad",
                f.index,
                f.timestamp_s,
                f.value.norm(),
                f.value.arg()
            );
        }
    }
    Ok(())
}
