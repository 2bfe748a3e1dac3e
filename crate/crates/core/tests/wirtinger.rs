use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slitspec::assembly::{assemble_mass, assemble_stiffness, FieldCondition, ScalarField};
use slitspec::eigensolve::{mesh_eigenpairs, rayleigh_quotient, EigenOptions};
use slitspec::slitmesh::{build_slit_circle, build_slit_disk, build_slit_sphere, CrackSpec, Domain, SlitMesh};
use slitspec::Execution;

fn test_meshes() -> Vec<(&'static str, SlitMesh)> {
    vec![
        ("sphere", build_slit_sphere(&CrackSpec::none(Domain::Sphere2), 3, 2.0).unwrap()),
        ("half_equator", build_slit_sphere(&CrackSpec::sphere_arc(PI / 2.0).unwrap(), 3, 2.0).unwrap()),
        ("great_circle", build_slit_sphere(&CrackSpec::sphere_arc(PI).unwrap(), 3, 2.0).unwrap()),
        ("slit_disk", build_slit_disk(&CrackSpec::disk(&[(0.0, 1.0)]).unwrap(), 3, 2.0).unwrap()),
        ("slit_circle", build_slit_circle(&CrackSpec::circle(&[(PI, PI)]).unwrap(), 128).unwrap()),
    ]
}

#[test]
fn eigenfunctions_attain_equality() {
    let opts = EigenOptions::default();
    for (name, mesh) in test_meshes() {
        let a = assemble_stiffness(&mesh, Execution::Parallel).unwrap();
        let m = assemble_mass(&mesh, false, Execution::Parallel).unwrap();
        let eig = mesh_eigenpairs(&mesh, mesh.components() + 2, &opts).unwrap();
        let v = ScalarField::new(&mesh, eig.eigenvectors[eig.zero_modes].clone(), FieldCondition::Neumann).unwrap();
        let lambda = eig.eigenvalues[eig.zero_modes];
        let rq = rayleigh_quotient(&a, &m, &mesh, &v).unwrap();
        assert!((rq - lambda).abs() <= 10.0 * opts.tol * lambda.max(1.0), "{name}: {rq} vs {lambda}");
    }
}

#[test]
fn random_fields_satisfy_the_inequality() {
    let opts = EigenOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, mesh) in test_meshes() {
        let a = assemble_stiffness(&mesh, Execution::Parallel).unwrap();
        let m = assemble_mass(&mesh, false, Execution::Parallel).unwrap();
        let eig = mesh_eigenpairs(&mesh, mesh.components() + 2, &opts).unwrap();
        let lambda1 = eig.lambda1_min().unwrap();
        for _ in 0..100 {
            let values: Vec<f64> = (0..mesh.dof_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = ScalarField::new(&mesh, values, FieldCondition::Free).unwrap();
            let rq = rayleigh_quotient(&a, &m, &mesh, &v).unwrap();
            assert!(rq >= lambda1 * (1.0 - 1e-9), "{name}: {rq} < {lambda1}");
        }
    }
}

#[test]
fn zero_modes_count_components() {
    let opts = EigenOptions::default();
    for (name, mesh) in test_meshes() {
        let eig = mesh_eigenpairs(&mesh, mesh.components() + 2, &opts).unwrap();
        assert_eq!(eig.zero_modes, mesh.components(), "{name}");
        assert!(eig.residuals.iter().zip(&eig.eigenvalues).all(|(r, l)| *r <= opts.tol * l.abs().max(1.0)), "{name}");
    }
}
