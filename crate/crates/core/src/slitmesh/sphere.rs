use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::grading::graded_nodes;
use super::{check_budget, orient, Cells, CrackSpec, Domain, MeshKind, SlitMesh};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum NodeRole {
    Plain,
    Tip,
    Seam,
}

/// Builds a latitude-longitude mesh of the unit sphere whose equator (in the
/// reference frame, polar axis `y`) carries the crack's great circle.
///
/// Longitude `psi` and latitude `eta` parametrise the sphere as
/// `(cos eta cos psi, sin eta, cos eta sin psi)`; the crack angle `phi` of
/// [`CrackSpec`] corresponds to `psi = pi - phi` on the equator. Every crack
/// endpoint is a longitude node, so the crack is a union of mesh edges.
/// Longitudes are graded toward each tip and latitudes toward the equator
/// when the crack has tips.
pub fn build_slit_sphere(crack: &CrackSpec, level: u32, grading: f64) -> Result<SlitMesh> {
    if crack.domain() != Domain::Sphere2 {
        return Err(Error::InvalidCrack(format!("expected a sphere crack, got {:?}", crack.domain())));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::Input(format!("grading must be >= 1, got {grading}")));
    }
    if level > 12 {
        return Err(Error::Resource(format!("refinement level {level} exceeds the mesh budget")));
    }
    let scale = 1usize << level;
    let n_base = 8 * scale;
    let n_half = 2 * scale;
    let min_segment = 2 * scale;
    check_budget(n_base * (2 * n_half) * 2)?;

    let has_tips = !crack.is_empty() && !crack.is_full_circle();
    let (psi, roles) = longitude_nodes(crack, n_base, min_segment, grading);
    let n_psi = psi.len();
    check_budget(n_psi * (2 * n_half - 1) + 2 + n_psi)?;

    let eta_grading = if has_tips { grading } else { 1.0 };
    let upper = graded_nodes(FRAC_PI_2, n_half, eta_grading, true, false);
    // rings 0..=2 n_half from the south pole (-y) to the north pole (+y)
    let mut eta = Vec::with_capacity(2 * n_half + 1);
    eta.extend(upper.iter().rev().map(|e| -e));
    eta.extend(upper.iter().skip(1).copied());
    eta[0] = -FRAC_PI_2;
    eta[n_half] = 0.0;
    eta[2 * n_half] = FRAC_PI_2;

    let ring_count = 2 * n_half - 1;
    let mut vertices: Vec<[f64; 3]> = Vec::with_capacity(ring_count * n_psi + 2 + n_psi);
    vertices.push([0.0, -1.0, 0.0]);
    for e in &eta[1..2 * n_half] {
        let (se, ce) = e.sin_cos();
        for &p in &psi {
            let (sp, cp) = p.sin_cos();
            vertices.push(unit([ce * cp, se, ce * sp]));
        }
    }
    let north = vertices.len();
    vertices.push([0.0, 1.0, 0.0]);
    let vid = |ring: usize, i: usize| 1 + (ring - 1) * n_psi + (i % n_psi);

    // duplicate interior crack vertices for the lower hemisphere
    let mut lower = vec![usize::MAX; n_psi];
    let mut seam_pairs = Vec::new();
    let mut tips = Vec::new();
    for i in 0..n_psi {
        let v = vid(n_half, i);
        match roles[i] {
            NodeRole::Seam => {
                let dup = vertices.len();
                vertices.push(vertices[v]);
                lower[i] = dup;
                seam_pairs.push((v, dup));
            }
            NodeRole::Tip => tips.push(v),
            NodeRole::Plain => {}
        }
    }
    let lower_of = |ring: usize, i: usize| -> usize {
        let i = i % n_psi;
        if ring == n_half && lower[i] != usize::MAX {
            lower[i]
        } else {
            vid(ring, i)
        }
    };

    let mut triangles = Vec::with_capacity(2 * n_psi * (2 * n_half));
    let mut push = |tri: [usize; 3], vertices: &[[f64; 3]]| {
        let c = centroid(tri, vertices);
        triangles.push(orient(tri, vertices, c));
    };
    for i in 0..n_psi {
        push([0, vid(1, i + 1), vid(1, i)], &vertices);
    }
    for ring in 1..(2 * n_half - 1) {
        let is_lower = ring < n_half;
        for i in 0..n_psi {
            let (a, b, c, d) = if is_lower {
                (lower_of(ring, i), lower_of(ring, i + 1), lower_of(ring + 1, i + 1), lower_of(ring + 1, i))
            } else {
                (vid(ring, i), vid(ring, i + 1), vid(ring + 1, i + 1), vid(ring + 1, i))
            };
            push([a, b, c], &vertices);
            push([a, c, d], &vertices);
        }
    }
    for i in 0..n_psi {
        push([vid(2 * n_half - 1, i), vid(2 * n_half - 1, i + 1), north], &vertices);
    }

    if !crack.frame_is_identity() {
        for v in vertices.iter_mut() {
            *v = unit(crack.to_world(v));
        }
    }

    Ok(SlitMesh::assemble(
        MeshKind::Sphere,
        vertices,
        Cells::Triangles(triangles),
        seam_pairs,
        tips,
        0,
        crack.clone(),
    ))
}

fn longitude_nodes(crack: &CrackSpec, n_base: usize, min_segment: usize, grading: f64) -> (Vec<f64>, Vec<NodeRole>) {
    if crack.is_empty() || crack.is_full_circle() {
        let role = if crack.is_full_circle() { NodeRole::Seam } else { NodeRole::Plain };
        let psi = (0..n_base).map(|i| TAU * i as f64 / n_base as f64).collect();
        return (psi, vec![role; n_base]);
    }
    let mut breaks: Vec<f64> = crack
        .arcs()
        .iter()
        .flat_map(|&(a, b)| [(PI - b).rem_euclid(TAU), (PI - a).rem_euclid(TAU)])
        .collect();
    breaks.sort_by(f64::total_cmp);
    let m = breaks.len();
    let mut psi = Vec::new();
    let mut roles = Vec::new();
    for k in 0..m {
        let start = breaks[k];
        let end = if k + 1 < m { breaks[k + 1] } else { breaks[0] + TAU };
        let len = end - start;
        let count = ((n_base as f64 * len / TAU).round() as usize).max(min_segment);
        let on_crack = crack.sphere_contains_angle(PI - (start + 0.5 * len));
        let nodes = graded_nodes(len, count, grading, true, true);
        for (j, s) in nodes[..count].iter().enumerate() {
            psi.push(start + s);
            roles.push(if j == 0 {
                NodeRole::Tip
            } else if on_crack {
                NodeRole::Seam
            } else {
                NodeRole::Plain
            });
        }
    }
    (psi, roles)
}

fn unit(p: [f64; 3]) -> [f64; 3] {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

fn centroid(tri: [usize; 3], v: &[[f64; 3]]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for &i in &tri {
        for k in 0..3 {
            c[k] += v[i][k] / 3.0;
        }
    }
    c
}
