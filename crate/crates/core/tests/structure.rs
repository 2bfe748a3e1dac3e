use std::f64::consts::PI;

use proptest::prelude::*;
use slitspec::slitmesh::{build_slit_circle, build_slit_disk, build_slit_sphere, refine, CrackSpec, Domain, SlitMesh};

fn seam_coordinates_agree(mesh: &SlitMesh) -> bool {
    let v = mesh.vertices();
    mesh.seam_pairs().iter().all(|&(l, r)| l != r && v[l] == v[r])
}

#[test]
fn closed_sphere_counts() {
    let mesh = build_slit_sphere(&CrackSpec::none(Domain::Sphere2), 2, 2.0).unwrap();
    assert_eq!(mesh.euler_characteristic(), 2);
    assert!(mesh.seam_pairs().is_empty());
    assert!(mesh.tip_vertices().is_empty());
    assert_eq!(mesh.components(), 1);
    mesh.validate().unwrap();
}

#[test]
fn half_equator_has_polar_tips() {
    let mesh = build_slit_sphere(&CrackSpec::sphere_arc(PI / 2.0).unwrap(), 0, 2.0).unwrap();
    assert_eq!(mesh.euler_characteristic(), 1);
    assert!(!mesh.seam_pairs().is_empty());
    let mut poles: Vec<f64> = mesh.tip_vertices().iter().map(|&t| mesh.vertices()[t][2]).collect();
    poles.sort_by(f64::total_cmp);
    assert_eq!(poles.len(), 2);
    assert!((poles[0] + 1.0).abs() < 1e-12 && (poles[1] - 1.0).abs() < 1e-12);
}

#[test]
fn full_great_circle_splits_the_sphere() {
    let mesh = build_slit_sphere(&CrackSpec::sphere_arc(PI).unwrap(), 2, 2.0).unwrap();
    assert_eq!(mesh.components(), 2);
    assert!(mesh.tip_vertices().is_empty());
    assert!(!mesh.check_condition_t().connected);
}

#[test]
fn slit_disk_and_plain_disk() {
    let slit = build_slit_disk(&CrackSpec::disk(&[(0.0, 1.0)]).unwrap(), 3, 2.0).unwrap();
    assert_eq!(slit.euler_characteristic(), 1);
    assert_eq!(slit.components(), 1);
    assert!(seam_coordinates_agree(&slit));
    let plain = build_slit_disk(&CrackSpec::none(Domain::Disk2), 3, 2.0).unwrap();
    assert_eq!(plain.euler_characteristic(), 1);
    assert!(plain.seam_pairs().is_empty());
}

#[test]
fn circle_cut_at_a_point_is_an_interval() {
    let mesh = build_slit_circle(&CrackSpec::circle(&[(PI, PI)]).unwrap(), 64).unwrap();
    assert_eq!(mesh.components(), 1);
    assert_eq!(mesh.dof_count(), 65);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn single_arc_cut_is_a_disk(beta in 0.05f64..3.0, level in 0u32..3) {
        let mesh = build_slit_sphere(&CrackSpec::sphere_arc(beta).unwrap(), level, 2.0).unwrap();
        prop_assert!(mesh.validate().is_ok());
        prop_assert_eq!(mesh.euler_characteristic(), 1);
        prop_assert_eq!(mesh.components(), 1);
        prop_assert_eq!(mesh.tip_vertices().len(), 2);
        prop_assert!(seam_coordinates_agree(&mesh));
    }

    #[test]
    fn refinement_keeps_topology(beta in 0.1f64..3.0) {
        let coarse = build_slit_sphere(&CrackSpec::sphere_arc(beta).unwrap(), 1, 1.0).unwrap();
        let fine = refine(&coarse);
        prop_assert!(fine.validate().is_ok());
        prop_assert_eq!(fine.euler_characteristic(), coarse.euler_characteristic());
        prop_assert_eq!(fine.components(), coarse.components());
        prop_assert_eq!(fine.tip_vertices().len(), coarse.tip_vertices().len());
        prop_assert!(seam_coordinates_agree(&fine));
        prop_assert!(fine.h_max() < coarse.h_max());
    }

    #[test]
    fn closing_seams_drops_dofs(beta in 0.2f64..2.8, keep_every in 2usize..5) {
        let mesh = build_slit_sphere(&CrackSpec::sphere_arc(beta).unwrap(), 2, 2.0).unwrap();
        let closed = mesh.close_seams(|k| k % keep_every != 0);
        let removed = (0..mesh.seam_pairs().len()).filter(|k| k % keep_every != 0).count();
        prop_assert_eq!(closed.dof_count(), mesh.dof_count() - removed);
        prop_assert_eq!(closed.cells().len(), mesh.cells().len());
        prop_assert!(seam_coordinates_agree(&closed));
        prop_assert!(closed.validate().is_ok());
    }
}
