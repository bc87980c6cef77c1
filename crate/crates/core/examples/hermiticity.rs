//! Measure `|⟨f, A h⟩ − ⟨A f, h⟩|` for every physical operator, together
//! with a control that drops the measure terms and must fail.

use rotor::operators::{hermiticity_defect, OperatorTag};
use rotor::quadrature::QuadratureSpec;
use rotor::suites::hermiticity_pair;
use rotor::ModelParams;

fn main() -> rotor::Result<()> {
    let p = ModelParams::unit(3)?;
    let spec = QuadratureSpec::new(48);
    let mut ops = OperatorTag::all_physical(p.dim());
    ops.push(OperatorTag::UnsymmetrizedLaplacian);
    for op in ops {
        let (f, h) = hermiticity_pair(op.chart(), &p, 11, &spec)?;
        println!("{:<28} {:.1e}", op.name(), hermiticity_defect(&op, &f, &h, &p, &spec)?);
    }
    Ok(())
}
