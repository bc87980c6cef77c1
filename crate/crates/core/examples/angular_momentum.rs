//! The Hamiltonian equals the sum of squared angular momenta over `2R²`.

use rotor::families::{random_polynomial, rng};
use rotor::operators::{apply_angular_momentum, apply_hamiltonian_cartesian, apply_l2_over_2r2, TestFunction};
use rotor::{Chart, ModelParams};

fn main() -> rotor::Result<()> {
    let p = ModelParams::new(3, 1.0, 1.0)?;
    let mut r = rng(5);
    let f = random_polynomial(3, &p, &mut r).pullback(Chart::ReducedCartesian, &p);
    let x = [0.3, -0.2];
    let h = apply_hamiltonian_cartesian(&f, &x, &p)?;
    let l2 = apply_l2_over_2r2(&f, &x, &p)?;
    println!("H f = {:.12}, (Σ L²/2R²) f = {:.12}", h.re, l2.re);

    // L₁₂ generates rotations about the last axis; it annihilates z = √(R² − |x|²)
    let z = TestFunction::new(rotor::geometry::lift_exprs(&p)[2].clone(), Chart::ReducedCartesian);
    println!("L_12 z = {:.1e}", apply_angular_momentum(&z, 1, 2, &x, &p)?.norm());
    Ok(())
}
