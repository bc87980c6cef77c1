//! Run every invariant suite for the 2-sphere and print its rows.

use rotor::suites::{run_suite, Suite, SuiteOptions};
use rotor::ModelParams;

fn main() -> rotor::Result<()> {
    let p = ModelParams::unit(3)?;
    let opts = SuiteOptions { samples: 30, points: 30, resolution: 48, ..SuiteOptions::default() };
    for suite in [Suite::ChartEquivalence, Suite::AngularMomentum, Suite::Hermiticity, Suite::DiracBrackets] {
        let report = run_suite(suite, &p, &opts)?;
        println!("{suite}: {}", if report.pass() { "pass" } else { "FAIL" });
        for row in &report.rows {
            println!("  {:<42} {:.1e} ({:?} {:.0e})", row.name, row.deviation, row.expect, row.tolerance);
        }
    }
    Ok(())
}
