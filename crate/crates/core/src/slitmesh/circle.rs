use std::f64::consts::TAU;

use super::{check_budget, Cells, CrackSpec, Domain, MeshKind, SlitMesh};
use crate::error::{Error, Result};

/// Uniform segment graph of the unit circle minus the crack.
///
/// Each arc of the complement gets about `segments * length / 2 pi`
/// segments. A removed point leaves an interval whose two endpoints are
/// distinct DOFs at the same position; they are recorded as a seam pair.
pub fn build_slit_circle(crack: &CrackSpec, segments: usize) -> Result<SlitMesh> {
    if crack.domain() != Domain::Circle1 {
        return Err(Error::InvalidCrack(format!("expected a circle crack, got {:?}", crack.domain())));
    }
    if segments < 2 {
        return Err(Error::Input(format!("need at least 2 segments, got {segments}")));
    }
    check_budget(segments + crack.arcs().len())?;
    if crack.is_full_circle() {
        return Err(Error::InvalidCrack("the crack removes the whole circle".into()));
    }
    let point = |t: f64| [t.cos(), t.sin(), 0.0];
    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    let mut seam_pairs = Vec::new();

    let arcs = crack.arcs();
    if arcs.is_empty() {
        for i in 0..segments {
            vertices.push(point(TAU * i as f64 / segments as f64));
            cells.push([i, (i + 1) % segments]);
        }
    } else {
        // interval k runs from the end of cut k to the start of cut k + 1
        let mut ends = Vec::with_capacity(arcs.len());
        for (k, &(_, end)) in arcs.iter().enumerate() {
            let next_start = if k + 1 < arcs.len() { arcs[k + 1].0 } else { arcs[0].0 + TAU };
            let len = next_start - end;
            let m = ((segments as f64 * len / TAU).round() as usize).max(1);
            let first = vertices.len();
            for j in 0..=m {
                vertices.push(point(end + len * j as f64 / m as f64));
            }
            for j in 0..m {
                cells.push([first + j, first + j + 1]);
            }
            ends.push((first, vertices.len() - 1));
        }
        // a removed point leaves two interval ends at the same position
        for (k, &(a, b)) in arcs.iter().enumerate() {
            if b - a == 0.0 {
                let before = ends[(k + arcs.len() - 1) % arcs.len()].1;
                let after = ends[k].0;
                vertices[before] = vertices[after];
                seam_pairs.push((after, before));
            }
        }
    }
    Ok(SlitMesh::assemble(
        MeshKind::Circle,
        vertices,
        Cells::Segments(cells),
        seam_pairs,
        Vec::new(),
        0,
        crack.clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cut_gives_an_interval() {
        let crack = CrackSpec::circle(&[(0.0, 0.0)]).unwrap();
        let mesh = build_slit_circle(&crack, 64).unwrap();
        mesh.validate().unwrap();
        assert_eq!(mesh.cells().len(), 64);
        assert_eq!(mesh.dof_count(), 65);
        assert_eq!(mesh.seam_pairs().len(), 1);
        assert_eq!(mesh.euler_characteristic(), 1);
    }

    #[test]
    fn two_cut_points_give_two_seam_pairs() {
        let crack = CrackSpec::circle(&[(0.0, 0.0), (2.0, 2.0)]).unwrap();
        let mesh = build_slit_circle(&crack, 64).unwrap();
        mesh.validate().unwrap();
        assert_eq!(mesh.seam_pairs().len(), 2);
        assert_eq!(mesh.components(), 2);
    }

    #[test]
    fn closed_loop_without_cuts() {
        let mesh = build_slit_circle(&CrackSpec::none(Domain::Circle1), 32).unwrap();
        assert_eq!(mesh.euler_characteristic(), 0);
        assert_eq!(mesh.components(), 1);
    }

    #[test]
    fn two_removed_arcs_leave_two_components() {
        let crack = CrackSpec::circle(&[(0.0, 1.0), (3.0, 4.0)]).unwrap();
        let mesh = build_slit_circle(&crack, 100).unwrap();
        assert_eq!(mesh.components(), 2);
        assert!(mesh.seam_pairs().is_empty());
    }
}
