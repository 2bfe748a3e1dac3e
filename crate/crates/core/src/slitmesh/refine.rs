use std::collections::HashMap;

use super::{Cells, MeshKind, SlitMesh};

/// Uniform refinement: every triangle is split 1-to-4 through its edge
/// midpoints (every segment 1-to-2).
///
/// Each DOF edge gets its own midpoint, so the two copies of a seam edge
/// produce two coincident midpoints, which become a new seam pair. Sphere
/// midpoints, and midpoints of edges on the unit circle boundary of a disk or
/// circle graph, are projected back onto the unit sphere or circle. Existing
/// vertices keep their indices.
pub fn refine(mesh: &SlitMesh) -> SlitMesh {
    let mut vertices = mesh.vertices().to_vec();
    let kind = mesh.kind();
    let mut midpoint_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<[f64; 3]>| -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = midpoint_of.get(&key) {
            return m;
        }
        let (pa, pb) = (vertices[key.0], vertices[key.1]);
        let mut p = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.5 * (pa[2] + pb[2])];
        let project = match kind {
            MeshKind::Sphere | MeshKind::Circle => true,
            MeshKind::Disk => on_unit_circle(&pa) && on_unit_circle(&pb),
        };
        if project {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            p = [p[0] / n, p[1] / n, p[2] / n];
        }
        let m = vertices.len();
        vertices.push(p);
        midpoint_of.insert(key, m);
        m
    };

    let cells = match mesh.cells() {
        Cells::Triangles(tris) => {
            let mut out = Vec::with_capacity(4 * tris.len());
            for &[a, b, c] in tris {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                out.push([a, ab, ca]);
                out.push([b, bc, ab]);
                out.push([c, ca, bc]);
                out.push([ab, bc, ca]);
            }
            Cells::Triangles(out)
        }
        Cells::Segments(segs) => {
            let mut out = Vec::with_capacity(2 * segs.len());
            for &[a, b] in segs {
                let m = midpoint(a, b, &mut vertices);
                out.push([a, m]);
                out.push([m, b]);
            }
            Cells::Segments(out)
        }
    };

    // lower copy -> upper copy
    let mut canonical: Vec<usize> = (0..mesh.dof_count()).collect();
    for &(l, r) in mesh.seam_pairs() {
        canonical[r] = l;
    }
    let mut seam_pairs = mesh.seam_pairs().to_vec();
    let mut new_pairs = Vec::new();
    for (&(a, b), &m) in &midpoint_of {
        let (ca, cb) = (canonical[a], canonical[b]);
        let key = (ca.min(cb), ca.max(cb));
        if key != (a, b) {
            if let Some(&m_upper) = midpoint_of.get(&key) {
                new_pairs.push((m_upper, m));
            }
        }
    }
    new_pairs.sort_unstable();
    seam_pairs.extend(new_pairs);

    SlitMesh::assemble(
        kind,
        vertices,
        cells,
        seam_pairs,
        mesh.tip_vertices().to_vec(),
        mesh.generation() + 1,
        mesh.crack().clone(),
    )
}

fn on_unit_circle(p: &[f64; 3]) -> bool {
    ((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-12 && p[2] == 0.0
}
