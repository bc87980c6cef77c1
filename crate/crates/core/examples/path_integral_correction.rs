//! Measure the potential that naive polar time slicing adds to the free
//! particle in the plane, and check that the corrected slicing removes it.

use rotor::pathintegral::{bump_family, extract_effective_potentials, sample_radii, Prescription, RadialGrid};
use rotor::ModelParams;

fn main() -> rotor::Result<()> {
    let p = ModelParams::unit(2)?;
    let grid = RadialGrid::default();
    let eps = [4e-3, 2e-3, 1e-3];
    let radii = sample_radii(0.5, 3.0, 0.25);
    for m in [0, 1] {
        let family = bump_family(m, &grid)?;
        let t = std::time::Instant::now();
        let tables = extract_effective_potentials(
            &family,
            &radii,
            &[Prescription::NaivePolar, Prescription::CorrectedPolar],
            &eps,
            &p,
        )?;
        let (naive, corrected) = (&tables[0], &tables[1]);
        println!(
            "m = {m}: naive slicing, 8r²ΔV/ħ² = {:.5} (spread {:.1e}) [{:.1?}]",
            naive.fit,
            naive.fit_spread,
            t.elapsed()
        );
        for s in &naive.samples {
            println!(
                "  r = {:.3}  ΔV = {:.6}  ħ²/8r² = {:.6}  rel.err = {:.1e}  family spread = {:.1e}",
                s.r, s.delta_v, s.predicted, s.relative_error, s.spread
            );
        }
        let worst = corrected.samples.iter().map(|s| (s.delta_v / s.predicted).abs()).fold(0.0, f64::max);
        println!("m = {m}: corrected slicing, max |ΔV|/(ħ²/8r²) = {worst:.1e}");
    }
    Ok(())
}
