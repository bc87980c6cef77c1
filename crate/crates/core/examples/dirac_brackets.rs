//! Check the constrained bracket algebra of the 2-sphere at random phase
//! space points, and the Jacobi identity for random observables.

use rotor::dynamics::{check_bracket_families, jacobi_defect};
use rotor::ModelParams;

fn main() -> rotor::Result<()> {
    let p = ModelParams::new(3, 1.3, 1.0)?;
    for c in check_bracket_families(&p, 1000, 7)? {
        println!("{:<10} max deviation {:.1e} over {} points", c.family, c.max_deviation, c.samples);
    }
    println!("Jacobi identity defect {:.1e}", jacobi_defect(&p, 20, 4, 9)?);
    Ok(())
}
