use proptest::prelude::*;

use rotor::families::{dual_chart_points, harmonic_family, random_polynomial, rng};
use rotor::operators::{
    apply_hamiltonian_cartesian, apply_hamiltonian_curvilinear, apply_l2_over_2r2, hermiticity_defect, OperatorTag,
    TestFunction,
};
use rotor::quadrature::QuadratureSpec;
use rotor::suites::hermiticity_pair;
use rotor::{Chart, ModelParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn harmonics_are_eigenfunctions_in_both_charts(
        d in 2usize..=5,
        seed in 0u64..1000,
        r in 0.5f64..3.0,
        hbar in 0.2f64..2.0,
    ) {
        let p = ModelParams::new(d, r, hbar).unwrap();
        let pts = dual_chart_points(5, &p, seed + 1, 0.05);
        for f in harmonic_family(3, 3, &p, seed) {
            let l = f.degree as f64;
            let lambda = hbar * hbar * l * (l + d as f64 - 2.0) / (2.0 * r * r);
            let cart = f.pullback(Chart::ReducedCartesian, &p);
            let curv = f.pullback(Chart::Hyperspherical, &p);
            let floor = lambda * f.scale;
            for pt in &pts {
                let a = apply_hamiltonian_cartesian(&cart, &pt.reduced, &p).unwrap();
                let b = apply_hamiltonian_curvilinear(&curv, &pt.angles, &p).unwrap();
                let expected = lambda * cart.eval(&pt.reduced);
                prop_assert!((a.re - expected).abs() < 1e-10 * floor);
                prop_assert!((b.re - expected).abs() < 1e-10 * floor);
                prop_assert!(a.im.abs() < 1e-12 && b.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hamiltonian_is_angular_momentum_squared(d in 2usize..=5, seed in 0u64..1000, r in 0.5f64..3.0) {
        let p = ModelParams::new(d, r, 1.0).unwrap();
        let mut g = rng(seed);
        let f = random_polynomial(3, &p, &mut g).pullback(Chart::ReducedCartesian, &p);
        for pt in dual_chart_points(5, &p, seed, 0.05) {
            let h = apply_hamiltonian_cartesian(&f, &pt.reduced, &p).unwrap();
            let l2 = apply_l2_over_2r2(&f, &pt.reduced, &p).unwrap();
            prop_assert!((h - l2).norm() < 1e-10 * h.norm().max(1.0 / (r * r)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn momenta_are_hermitian(seed in 0u64..200) {
        let p = ModelParams::unit(3).unwrap();
        let spec = QuadratureSpec::new(40);
        for op in OperatorTag::all_physical(3) {
            let (f, h) = hermiticity_pair(op.chart(), &p, seed, &spec).unwrap();
            prop_assert!(hermiticity_defect(&op, &f, &h, &p, &spec).unwrap() < 1e-8, "{}", op.name());
        }
    }
}

#[test]
fn constants_carry_zero_energy() {
    for d in 2..=6 {
        let p = ModelParams::unit(d).unwrap();
        let pt = &dual_chart_points(1, &p, 4, 0.1)[0];
        let c = TestFunction::constant(2.5, Chart::ReducedCartesian);
        let a = TestFunction::constant(2.5, Chart::Hyperspherical);
        assert!(apply_hamiltonian_cartesian(&c, &pt.reduced, &p).unwrap().norm() < 1e-14);
        assert!(apply_hamiltonian_curvilinear(&a, &pt.angles, &p).unwrap().norm() < 1e-14);
    }
}

#[test]
fn dropping_measure_terms_breaks_hermiticity() {
    let p = ModelParams::unit(3).unwrap();
    let spec = QuadratureSpec::new(48);
    let op = OperatorTag::UnsymmetrizedLaplacian;
    let worst = (0..5)
        .map(|s| {
            let (f, h) = hermiticity_pair(op.chart(), &p, s, &spec).unwrap();
            hermiticity_defect(&op, &f, &h, &p, &spec).unwrap()
        })
        .fold(0.0f64, f64::max);
    assert!(worst > 1e-3, "control defect {worst:e}");
}

#[test]
fn operators_reject_points_outside_their_chart() {
    let p = ModelParams::unit(3).unwrap();
    let f = TestFunction::constant(1.0, Chart::ReducedCartesian);
    assert!(apply_hamiltonian_cartesian(&f, &[0.9, 0.9], &p).is_err());
    let g = TestFunction::constant(1.0, Chart::Hyperspherical);
    assert!(apply_hamiltonian_curvilinear(&g, &[0.0, 1.0], &p).is_err());
}
