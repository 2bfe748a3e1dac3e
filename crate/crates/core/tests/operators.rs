use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slitspec::assembly::{
    assemble_mass, assemble_stiffness, assemble_weighted_energy, assemble_weighted_stiffness, ScalarField,
};
use slitspec::eigensolve::{mesh_eigenpairs, EigenOptions};
use slitspec::slitmesh::{build_slit_disk, build_slit_sphere, CrackSpec};
use slitspec::Execution;

fn half_equator(level: u32) -> slitspec::slitmesh::SlitMesh {
    build_slit_sphere(&CrackSpec::sphere_arc(PI / 2.0).unwrap(), level, 2.0).unwrap()
}

#[test]
fn stiffness_annihilates_constants() {
    let mesh = half_equator(3);
    let a = assemble_stiffness(&mesh, Execution::Parallel).unwrap();
    assert!(a.is_symmetric());
    let scale = a.diagonal().iter().copied().fold(0.0, f64::max);
    assert!(a.row_sums().iter().all(|s| s.abs() < 1e-12 * scale));
}

#[test]
fn mass_totals_match_area() {
    let mesh = half_equator(4);
    let consistent = assemble_mass(&mesh, false, Execution::Parallel).unwrap();
    let lumped = assemble_mass(&mesh, true, Execution::Parallel).unwrap();
    assert_relative_eq!(consistent.total(), lumped.total(), max_relative = 1e-12);
    // polyhedral area approaches 4 pi from below
    assert!(consistent.total() < 4.0 * PI && consistent.total() > 0.99 * 4.0 * PI);
}

#[test]
fn unit_weight_energy_is_the_stiffness_form() {
    let mesh = build_slit_disk(&CrackSpec::disk(&[(0.0, 1.0)]).unwrap(), 3, 2.0).unwrap();
    let u = ScalarField::interpolate(&mesh, |p, _| p[0] * p[0] - 0.5 * p[1] + p[0] * p[1]).unwrap();
    let a = assemble_stiffness(&mesh, Execution::Parallel).unwrap();
    let w = assemble_weighted_stiffness(&mesh, 2, Execution::Parallel).unwrap();
    let e = assemble_weighted_energy(&mesh, &u, 2, Execution::Parallel).unwrap();
    assert_relative_eq!(e, a.quad_form(u.values()), max_relative = 1e-12);
    assert_relative_eq!(e, w.quad_form(u.values()), max_relative = 1e-12);
}

#[test]
fn execution_modes_agree() {
    let mesh = half_equator(4);
    for lumped in [false, true] {
        let s = assemble_mass(&mesh, lumped, Execution::Sequential).unwrap();
        let p = assemble_mass(&mesh, lumped, Execution::Parallel).unwrap();
        assert_eq!(s.values(), p.values());
    }
    let s = assemble_stiffness(&mesh, Execution::Sequential).unwrap();
    let p = assemble_stiffness(&mesh, Execution::Parallel).unwrap();
    assert_eq!(s.values(), p.values());
    assert_eq!(s.col_idx(), p.col_idx());

    let mut opts = EigenOptions { exec: Execution::Sequential, ..EigenOptions::default() };
    let es = mesh_eigenpairs(&mesh, 4, &opts).unwrap();
    opts.exec = Execution::Parallel;
    let ep = mesh_eigenpairs(&mesh, 4, &opts).unwrap();
    for (a, b) in es.eigenvalues.iter().zip(&ep.eigenvalues) {
        assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operators_are_positive(seed in any::<u64>(), beta in 0.1f64..3.0) {
        let mesh = build_slit_sphere(&CrackSpec::sphere_arc(beta).unwrap(), 2, 2.0).unwrap();
        let a = assemble_stiffness(&mesh, Execution::Sequential).unwrap();
        let m = assemble_mass(&mesh, false, Execution::Sequential).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..mesh.dof_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        prop_assert!(a.quad_form(&x) >= -1e-12);
        prop_assert!(m.quad_form(&x) > 0.0);
        let y: Vec<f64> = (0..mesh.dof_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (xy, yx) = (a.bilinear(&x, &y), a.bilinear(&y, &x));
        prop_assert!((xy - yx).abs() <= 1e-12 * (1.0 + xy.abs()));
    }
}
