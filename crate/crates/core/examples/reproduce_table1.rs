//! Regenerates the 20 Hz comparison table (theory vs measured, four window
//! lengths at 60 fps plus h=8 at 240 fps) and checks it against the reference values.

use pmulab::{reproduce_table1, Table1Config};

fn main() -> pmulab::Result<()> {
    let report = reproduce_table1(&Table1Config::default())?;
    print!("{}", report.render());
    if !report.all_pass() {
        std::process::exit(1);
    }
    Ok(())
}
