//! Builds a pure carrier plus one magnitude- and one phase-modulated waveform,
//! and prints a few samples and the CSV header.

use pmulab::{synthesize, ModulationSpec, WaveformSpec};

fn main() -> pmulab::Result<()> {
    let w = WaveformSpec::default().with_duration_secs(0.1);
    let cases = [
        ("carrier", ModulationSpec::none()),
        ("magnitude", ModulationSpec::magnitude(0.05, 10.0)),
        ("phase", ModulationSpec::phase(0.05, 10.0).with_phim(0.3)),
    ];
    for (name, m) in cases {
        let x = synthesize(&w, &m)?;
        let peak = x.samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        println!("{name:>9}: {} samples, peak {peak:.6}", x.len());
        println!("           first: {:?}", &x.samples[..4]);
    }

    let x = synthesize(&w, &ModulationSpec::magnitude(0.01, 20.0))?;
    let csv = x.to_csv();
    for line in csv.lines().take(3) {
        println!("{line}");
    }
    Ok(())
}
