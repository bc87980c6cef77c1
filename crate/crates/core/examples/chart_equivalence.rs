//! Apply the Laplace-Beltrami Hamiltonian in the reduced cartesian chart and
//! in hyperspherical angles to the same spherical harmonics, and compare both
//! with the eigenvalue `ħ² l(l+D−2)/(2R²)`.

use rotor::families::{dual_chart_points, harmonic_family};
use rotor::operators::{apply_hamiltonian_cartesian, apply_hamiltonian_curvilinear};
use rotor::{Chart, ModelParams};

fn main() -> rotor::Result<()> {
    let p = ModelParams::new(4, 1.5, 1.0)?;
    let points = dual_chart_points(20, &p, 7, 0.05);
    for f in harmonic_family(6, 3, &p, 3) {
        let l = f.degree as f64;
        let lambda = p.hbar() * p.hbar() * l * (l + p.dim() as f64 - 2.0) / (2.0 * p.radius() * p.radius());
        let cart = f.pullback(Chart::ReducedCartesian, &p);
        let curv = f.pullback(Chart::Hyperspherical, &p);
        let (mut charts, mut eigen) = (0.0f64, 0.0f64);
        for pt in &points {
            let a = apply_hamiltonian_cartesian(&cart, &pt.reduced, &p)?.re;
            let b = apply_hamiltonian_curvilinear(&curv, &pt.angles, &p)?.re;
            charts = charts.max((a - b).abs());
            eigen = eigen.max((a - lambda * cart.eval(&pt.reduced)).abs());
        }
        println!("l = {}: |H_cart f − H_curv f| ≤ {charts:.1e}, |H f − λ f| ≤ {eigen:.1e}", f.degree);
    }
    Ok(())
}
