use std::f64::consts::PI;

use super::grading::graded_nodes;
use super::{check_budget, orient, Cells, CrackSpec, Domain, MeshKind, SlitMesh, ANGLE_EPS};
use crate::error::{Error, Result};

/// Polar mesh of the unit disk with radial slits on the negative x-axis.
///
/// Ray 0 points along the negative x-axis; cells on the `y > 0` side of it
/// use the upper copies of slit vertices. Every slit endpoint is a ring
/// radius. Rings are graded toward interior tips, rays toward the slit
/// direction when a tip lies off the origin.
pub fn build_slit_disk(crack: &CrackSpec, level: u32, grading: f64) -> Result<SlitMesh> {
    if crack.domain() != Domain::Disk2 {
        return Err(Error::InvalidCrack(format!("expected a disk crack, got {:?}", crack.domain())));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::Input(format!("grading must be >= 1, got {grading}")));
    }
    if level > 12 {
        return Err(Error::Resource(format!("refinement level {level} exceeds the mesh budget")));
    }
    let scale = 1usize << level;
    let n_theta = 8 * scale;
    let n_radial = 4 * scale;
    let min_segment = scale;
    check_budget(n_theta * n_radial * 2)?;

    let segs = crack.arcs();
    let is_tip = |r: f64| -> bool {
        segs.iter().any(|&(a, b)| (r - a).abs() <= ANGLE_EPS || ((r - b).abs() <= ANGLE_EPS && b < 1.0 - ANGLE_EPS))
    };
    let origin_tip = segs.iter().any(|&(a, _)| a <= ANGLE_EPS);
    let off_origin_tip = segs.iter().any(|&(a, b)| a > ANGLE_EPS || b < 1.0 - ANGLE_EPS);

    // radial breakpoints
    let mut breaks = vec![0.0, 1.0];
    for &(a, b) in segs {
        breaks.push(a);
        breaks.push(b);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() <= ANGLE_EPS);
    let mut radii = vec![0.0];
    for w in breaks.windows(2) {
        let (p, q) = (w[0], w[1]);
        let len = q - p;
        let count = ((n_radial as f64 * len).round() as usize).max(min_segment);
        let graded_start = if p <= ANGLE_EPS { origin_tip } else { is_tip(p) };
        let nodes = graded_nodes(len, count, grading, graded_start, is_tip(q));
        radii.extend(nodes[1..].iter().map(|s| p + s));
        *radii.last_mut().unwrap() = q;
    }
    let n_rings = radii.len() - 1;

    // rays: theta_0 = pi (negative x-axis), increasing counterclockwise from -pi
    let theta_grading = if off_origin_tip { grading } else { 1.0 };
    let theta: Vec<f64> = graded_nodes(2.0 * PI, n_theta, theta_grading, true, true)[..n_theta]
        .iter()
        .map(|s| -PI + s)
        .collect();
    check_budget(1 + n_rings * n_theta + n_rings)?;

    let mut vertices: Vec<[f64; 3]> = Vec::with_capacity(1 + n_rings * n_theta + n_rings);
    vertices.push([0.0, 0.0, 0.0]);
    for &r in &radii[1..] {
        for (k, &t) in theta.iter().enumerate() {
            if k == 0 {
                vertices.push([-r, 0.0, 0.0]);
            } else {
                let (s, c) = t.sin_cos();
                vertices.push([r * c, r * s, 0.0]);
            }
        }
    }
    let vid = |ring: usize, k: usize| -> usize {
        if ring == 0 {
            0
        } else {
            1 + (ring - 1) * n_theta + (k % n_theta)
        }
    };

    let on_slit = |r: f64| segs.iter().any(|&(a, b)| r > a + ANGLE_EPS && r <= b + ANGLE_EPS);
    let mut upper = vec![usize::MAX; n_rings + 1];
    let mut seam_pairs = Vec::new();
    let mut tips = Vec::new();
    if origin_tip {
        tips.push(0);
    }
    for ring in 1..=n_rings {
        let r = radii[ring];
        let v = vid(ring, 0);
        if is_tip(r) && r < 1.0 - ANGLE_EPS {
            tips.push(v);
        } else if on_slit(r) {
            let dup = vertices.len();
            vertices.push(vertices[v]);
            upper[ring] = dup;
            seam_pairs.push((dup, v));
        }
    }
    // the sector between the last ray and ray 0 lies on the upper side
    let at = |ring: usize, k: usize| -> usize {
        if k % n_theta == 0 && k > 0 && ring > 0 && upper[ring] != usize::MAX {
            upper[ring]
        } else {
            vid(ring, k)
        }
    };

    let outward = [0.0, 0.0, 1.0];
    let mut triangles = Vec::with_capacity(2 * n_theta * n_rings);
    for k in 0..n_theta {
        triangles.push(orient([0, at(1, k), at(1, k + 1)], &vertices, outward));
    }
    for ring in 1..n_rings {
        for k in 0..n_theta {
            let a = at(ring, k);
            let b = at(ring, k + 1);
            let c = at(ring + 1, k + 1);
            let d = at(ring + 1, k);
            triangles.push(orient([a, b, c], &vertices, outward));
            triangles.push(orient([a, c, d], &vertices, outward));
        }
    }

    Ok(SlitMesh::assemble(
        MeshKind::Disk,
        vertices,
        Cells::Triangles(triangles),
        seam_pairs,
        tips,
        0,
        crack.clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_slit_is_connected_disk() {
        let crack = CrackSpec::disk(&[(0.0, 1.0)]).unwrap();
        let mesh = build_slit_disk(&crack, 3, 2.0).unwrap();
        mesh.validate().unwrap();
        assert_eq!(mesh.euler_characteristic(), 1);
        assert_eq!(mesh.components(), 1);
        assert_eq!(mesh.tip_vertices(), &[0]);
        assert!(!mesh.seam_pairs().is_empty());
    }

    #[test]
    fn no_slit() {
        let mesh = build_slit_disk(&CrackSpec::none(Domain::Disk2), 2, 2.0).unwrap();
        mesh.validate().unwrap();
        assert_eq!(mesh.euler_characteristic(), 1);
        assert!(mesh.seam_pairs().is_empty());
        assert!(mesh.tip_vertices().is_empty());
    }

    #[test]
    fn outer_slit_has_one_interior_tip() {
        let crack = CrackSpec::disk(&[(0.5, 1.0)]).unwrap();
        let mesh = build_slit_disk(&crack, 2, 2.0).unwrap();
        mesh.validate().unwrap();
        assert_eq!(mesh.tip_vertices().len(), 1);
        let p = mesh.vertices()[mesh.tip_vertices()[0]];
        assert_eq!(p, [-0.5, 0.0, 0.0]);
        assert_eq!(mesh.euler_characteristic(), 1);
    }

    #[test]
    fn slit_vertices_lie_on_negative_axis() {
        let crack = CrackSpec::disk(&[(0.0, 1.0)]).unwrap();
        let mesh = build_slit_disk(&crack, 2, 2.0).unwrap();
        for &(l, r) in mesh.seam_pairs() {
            assert_eq!(mesh.vertices()[l], mesh.vertices()[r]);
            assert_eq!(mesh.vertices()[l][1], 0.0);
            assert!(mesh.vertices()[l][0] < 0.0);
        }
    }
}
