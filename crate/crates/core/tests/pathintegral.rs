use proptest::prelude::*;

use rotor::pathintegral::{
    bump_family, extract_effective_potential, neville_at_zero, sample_radii, slice_step, Prescription, RadialGrid,
    SliceKernelSpec,
};
use rotor::{ModelParams, RotorError};

proptest! {
    #[test]
    fn neville_is_exact_on_quadratics(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let x = [4e-3, 2e-3, 1e-3];
        let y: Vec<f64> = x.iter().map(|x| a + b * x + c * x * x).collect();
        prop_assert!((neville_at_zero(&x, &y) - a).abs() < 1e-10);
    }
}

#[test]
fn naive_slicing_adds_an_eighth_over_r_squared() {
    let p = ModelParams::unit(2).unwrap();
    let grid = RadialGrid::default();
    let family = bump_family(2, &grid).unwrap();
    let radii = sample_radii(0.75, 2.5, 0.25);
    let t = extract_effective_potential(&family, &radii, Prescription::NaivePolar, &[4e-3, 2e-3, 1e-3], &p).unwrap();
    for s in &t.samples {
        let fit = 8.0 * s.r * s.r * s.delta_v;
        assert!((fit - 1.0).abs() < 0.02, "r = {}: {fit}", s.r);
    }
}

#[test]
fn cartesian_slicing_has_no_spurious_potential() {
    let p = ModelParams::unit(2).unwrap();
    let grid = RadialGrid::default();
    let family = bump_family(0, &grid).unwrap();
    let t = extract_effective_potential(&family, &[1.0, 2.0], Prescription::ExactCartesian, &[4e-3, 2e-3, 1e-3], &p)
        .unwrap();
    assert!(t.samples.iter().all(|s| s.delta_v.abs() < 1e-3 * s.predicted));
}

#[test]
fn one_slice_barely_changes_a_smooth_profile() {
    // a slowly varying profile changes by O(ε) under one slice
    let p = ModelParams::unit(2).unwrap();
    let grid = RadialGrid::default();
    let psi = bump_family(1, &grid).unwrap().remove(0);
    let next = slice_step(&psi, &SliceKernelSpec::new(1e-3, Prescription::CorrectedPolar), &p).unwrap();
    let i = psi.grid.nearest(1.75);
    assert!((next.samples[i] / psi.samples[i] - 1.0).abs() < 1e-2);
}

#[test]
fn wide_kernels_are_rejected() {
    let p = ModelParams::unit(2).unwrap();
    let grid = RadialGrid::default();
    let spec = SliceKernelSpec::new(1.0, Prescription::NaivePolar);
    assert!(matches!(spec.validate(&grid, &p), Err(RotorError::KernelWidth { .. })));
}
