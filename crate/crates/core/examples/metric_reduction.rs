//! The induced metric of the reduced chart: compare `g`, `g⁻¹` and `det g`
//! with their closed forms at a few points inside the chart.

use rotor::geometry::{inverse_metric, lift, metric, metric_determinant};
use rotor::ModelParams;

fn main() -> rotor::Result<()> {
    for d in 2..=6 {
        let p = ModelParams::new(d, 2.0, 1.0)?;
        let r2 = p.radius() * p.radius();
        let mut worst: f64 = 0.0;
        for k in 1..=5 {
            // points along a diagonal, approaching the equator
            let s = 0.18 * k as f64 * p.radius() / ((d - 1) as f64).sqrt();
            let x = vec![s; d - 1];
            let x2: f64 = x.iter().map(|a| a * a).sum();
            let det = metric_determinant(&x, &p)?;
            worst = worst.max((det - r2 / (r2 - x2)).abs() / det);
            let id = metric(&x, &p)? * inverse_metric(&x, &p)?;
            worst = worst.max((id - nalgebra::DMatrix::identity(d - 1, d - 1)).amax());
            let y = lift(&x, &p)?;
            let on_sphere = (y.iter().map(|a| a * a).sum::<f64>() - r2).abs() / r2;
            worst = worst.max(on_sphere);
        }
        println!("D = {d}: worst deviation of det g, g g⁻¹ and |lift|² from closed form = {worst:.1e}");
    }
    Ok(())
}
