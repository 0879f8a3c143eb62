//! Prints the estimator's gain and phase over oscillation frequency for the
//! four window lengths, with the comb nulls marked.

use pmulab::{comb_nulls, h1, response_curve, GainClass};

fn main() {
    let fs = 960.0;
    let n = 16;
    let hs = [1, 2, 4, 8];
    for &h in &hs {
        let nulls = comb_nulls(h * n, fs, 30.0).expect("nonzero window");
        println!("h={h}: nulls below 30 Hz at {nulls:?}");
    }

    let grid: Vec<f64> = (1..=30).map(f64::from).collect();
    println!(
        "\n{:>6} {}",
        "fm",
        hs.map(|h| format!("{:>20}", format!("h={h} G / theta"))).join("")
    );
    let rows = response_curve(&hs, fs, n, &grid).expect("valid grid");
    for (i, fm) in grid.iter().enumerate() {
        let cells: String = rows[i * hs.len()..(i + 1) * hs.len()]
            .iter()
            .map(|r| match r.gain.class {
                GainClass::Null => format!("{:>20}", "null"),
                _ => format!("{:>11.5} {:>7.2}", r.gain.gain, r.gain.theta_deg()),
            })
            .collect();
        println!("{fm:>6} {cells}");
    }

    let g = h1(2.0 * std::f64::consts::PI * 20.0 / fs, 128);
    println!(
        "\nH1 at 20 Hz, L=128: {:.6} (G {:.6}, theta {:.4} deg)",
        g.value,
        g.gain,
        g.theta_deg()
    );
}
