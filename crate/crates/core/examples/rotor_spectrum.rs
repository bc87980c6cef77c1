//! Diagonalize the rotor on spectral grids of increasing resolution, compare
//! with `ħ² l(l+D−2)/(2R²)` and its degeneracies, and cross-check with Lanczos.

use rotor::spectra::{
    assemble, compare_with_reference, compute_spectrum, extrapolate, level_count, reference_spectrum, LanczosOptions,
    Method, SpectralGrid,
};
use rotor::ModelParams;

fn main() -> rotor::Result<()> {
    for d in [2, 3, 4] {
        let p = ModelParams::unit(d)?;
        let levels = reference_spectrum(3, &p)?;
        let k = level_count(4, &p);
        let mut runs = Vec::new();
        for res in [24, 32, 48] {
            let op = assemble(&SpectralGrid::new(&p, res)?)?;
            let t = std::time::Instant::now();
            let s = compute_spectrum(&op, k, &Method::Dense)?;
            let worst = compare_with_reference(&s.clusters, &levels, 1e-8, &p)
                .iter()
                .fold(0.0f64, |m, l| m.max(l.relative_error));
            println!(
                "D = {d}, N = {res}: {} levels, worst relative error {worst:.1e} [{:.1?}]",
                s.clusters.len(),
                t.elapsed()
            );
            runs.push(s);
        }
        let ex = extrapolate(&runs)?;
        let mults: Vec<usize> = ex.clusters.iter().map(|c| c.multiplicity).collect();
        println!("D = {d}: extrapolated multiplicities {mults:?}, flagged = {}", ex.flagged);
    }

    let p = ModelParams::unit(3)?;
    let op = assemble(&SpectralGrid::new(&p, 16)?)?;
    let s = compute_spectrum(&op, 9, &Method::Iterative(LanczosOptions::default()))?;
    let e: Vec<String> = s.eigenvalues.iter().map(|v| format!("{v:.10}")).collect();
    println!("Lanczos, D = 3, N = 16: {}", e.join(" "));
    Ok(())
}
