//! Integrate the free particle in the reduced chart and, independently, in
//! the embedding with a constraint force; compare both with the great circle.

use rotor::dynamics::{
    angular_momenta, hamiltonian_value, integrate_embedded_oracle, integrate_reduced, lift_state, trajectory_deviation,
    PhaseState,
};
use rotor::{Chart, ModelParams};

fn great_circle(x0: &[f64], v0: &[f64], t: f64, r: f64) -> Vec<f64> {
    let speed = v0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let w = speed / r;
    x0.iter().zip(v0).map(|(x, v)| x * (w * t).cos() + v / w * (w * t).sin()).collect()
}

fn main() -> rotor::Result<()> {
    let p = ModelParams::new(4, 1.0, 1.0)?;
    let s0 = PhaseState::new(Chart::ReducedCartesian, vec![0.1, -0.2, 0.0], vec![0.05, 0.1, -0.08], 0.0, &p)?;
    let reduced = integrate_reduced(&s0, 5.0, 1e-3, &p)?;
    let (x0, v0) = lift_state(&s0, &p)?;
    let oracle = integrate_embedded_oracle(&x0, &v0, 5.0, 1e-3, &p)?;
    println!("reduced vs embedded: {:.1e}", trajectory_deviation(&reduced, &oracle, &p)?);

    let e0 = hamiltonian_value(&s0, &p)?;
    let l0 = angular_momenta(&x0, &v0);
    let (mut de, mut dl, mut dc) = (0.0f64, 0.0f64, 0.0f64);
    for s in &reduced.states {
        let (x, v) = lift_state(s, &p)?;
        de = de.max((hamiltonian_value(s, &p)? - e0).abs() / e0);
        dl = angular_momenta(&x, &v).iter().zip(&l0).fold(dl, |m, (a, b)| m.max((a - b).abs()));
        dc = great_circle(&x0, &v0, s.t, p.radius()).iter().zip(&x).fold(dc, |m, (a, b)| m.max((a - b).abs()));
    }
    println!("relative energy drift {de:.1e}, angular momentum drift {dl:.1e}, distance to great circle {dc:.1e}");
    Ok(())
}
