//! Triangle meshes of the sphere and the disk, and segment graphs of the
//! circle, in which cracks are realised by duplicating degrees of freedom.
//!
//! Every mesh vertex is one degree of freedom (DOF). A vertex lying in the
//! interior of a crack is stored twice with identical coordinates: the first
//! copy is used by the cells on the `Upper` side of the crack, the second by
//! the cells on the `Lower` side. Crack tips are stored once and shared.

mod circle;
mod crack;
mod disk;
mod export;
mod grading;
mod refine;
mod sphere;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

pub use circle::build_slit_circle;
pub use crack::{CrackSpec, Domain, Frame, ANGLE_EPS, IDENTITY};
pub use disk::build_slit_disk;
pub use export::{read_off_counts, write_off, MeshSidecar};
pub use grading::graded_nodes;
pub use refine::refine;
pub use sphere::build_slit_sphere;

use crate::error::{Error, Result};

/// Upper bound on the vertex count of a generated mesh.
pub const MAX_VERTICES: usize = 12_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Hash, Eq, Serialize, Deserialize)]
pub enum MeshKind {
    Sphere,
    Disk,
    Circle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cells {
    Triangles(Vec<[usize; 3]>),
    Segments(Vec<[usize; 2]>),
}

impl Cells {
    pub fn len(&self) -> usize {
        match self {
            Cells::Triangles(t) => t.len(),
            Cells::Segments(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Vertex indices of cell `i`.
    pub fn cell(&self, i: usize) -> &[usize] {
        match self {
            Cells::Triangles(t) => &t[i],
            Cells::Segments(s) => &s[i],
        }
    }
}

/// Which side of the crack a DOF belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrackSide {
    Off,
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionT {
    pub connected: bool,
    pub components: usize,
}

#[derive(Debug, Clone)]
pub struct SlitMesh {
    kind: MeshKind,
    vertices: Vec<[f64; 3]>,
    cells: Cells,
    seam_pairs: Vec<(usize, usize)>,
    tip_vertices: Vec<usize>,
    component_of: Vec<usize>,
    components: usize,
    h_max: f64,
    generation: u32,
    crack: CrackSpec,
}

impl SlitMesh {
    pub(crate) fn assemble(
        kind: MeshKind,
        vertices: Vec<[f64; 3]>,
        cells: Cells,
        seam_pairs: Vec<(usize, usize)>,
        mut tip_vertices: Vec<usize>,
        generation: u32,
        crack: CrackSpec,
    ) -> Self {
        tip_vertices.sort_unstable();
        tip_vertices.dedup();
        let (component_of, components) = label_components(vertices.len(), &cells);
        let h_max = longest_edge(&vertices, &cells);
        Self {
            kind,
            vertices,
            cells,
            seam_pairs,
            tip_vertices,
            component_of,
            components,
            h_max,
            generation,
            crack,
        }
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    /// Triangles of a surface or planar mesh; empty for circle graphs.
    pub fn triangles(&self) -> &[[usize; 3]] {
        match &self.cells {
            Cells::Triangles(t) => t,
            Cells::Segments(_) => &[],
        }
    }

    pub fn seam_pairs(&self) -> &[(usize, usize)] {
        &self.seam_pairs
    }

    pub fn tip_vertices(&self) -> &[usize] {
        &self.tip_vertices
    }

    /// Per-cell connected component label, in `0..components()`.
    pub fn component_of(&self) -> &[usize] {
        &self.component_of
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn crack(&self) -> &CrackSpec {
        &self.crack
    }

    pub fn dof_count(&self) -> usize {
        self.vertices.len()
    }

    /// Component label of every DOF.
    pub fn dof_components(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.vertices.len()];
        for c in 0..self.cells.len() {
            for &v in self.cells.cell(c) {
                out[v] = self.component_of[c];
            }
        }
        out
    }

    pub fn side_of(&self, dof: usize) -> CrackSide {
        for &(l, r) in &self.seam_pairs {
            if l == dof {
                return CrackSide::Upper;
            }
            if r == dof {
                return CrackSide::Lower;
            }
        }
        CrackSide::Off
    }

    /// Crack side of every DOF.
    pub fn sides(&self) -> Vec<CrackSide> {
        let mut out = vec![CrackSide::Off; self.vertices.len()];
        for &(l, r) in &self.seam_pairs {
            out[l] = CrackSide::Upper;
            out[r] = CrackSide::Lower;
        }
        out
    }

    /// Samples `f(point, side)` at every DOF. Points are in world coordinates.
    pub fn sample<F: Fn(&[f64; 3], CrackSide) -> f64>(&self, f: F) -> Vec<f64> {
        let sides = self.sides();
        self.vertices.iter().zip(sides).map(|(p, s)| f(p, s)).collect()
    }

    /// Unique undirected edges as DOF pairs `(min, max)`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = HashSet::new();
        for c in 0..self.cells.len() {
            let cell = self.cells.cell(c);
            for k in 0..cell.len() {
                let a = cell[k];
                let b = cell[(k + 1) % cell.len()];
                if cell.len() == 2 && k == 1 {
                    break;
                }
                set.insert((a.min(b), a.max(b)));
            }
        }
        let mut v: Vec<_> = set.into_iter().collect();
        v.sort_unstable();
        v
    }

    /// `V - E + F` counted on DOFs, so cut edges count twice.
    pub fn euler_characteristic(&self) -> i64 {
        let v = self.vertices.len() as i64;
        let e = self.edges().len() as i64;
        let f = match &self.cells {
            Cells::Triangles(t) => t.len() as i64,
            Cells::Segments(_) => 0,
        };
        v - e + f
    }

    /// Connectivity of the complement of the crack. Cells are adjacent when
    /// they share a DOF, so cells on opposite sides of a seam are not.
    pub fn check_condition_t(&self) -> ConditionT {
        ConditionT { connected: self.components == 1, components: self.components }
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Input(msg));
        for &(l, r) in &self.seam_pairs {
            if l == r {
                return bad(format!("seam pair ({l}, {r}) is not two distinct DOFs"));
            }
            let (a, b) = (self.vertices[l], self.vertices[r]);
            let d = (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max);
            if d > 1e-12 {
                return bad(format!("seam pair ({l}, {r}) coordinates differ by {d:e}"));
            }
        }
        let seam: HashSet<usize> = self.seam_pairs.iter().flat_map(|&(l, r)| [l, r]).collect();
        if let Some(t) = self.tip_vertices.iter().find(|t| seam.contains(t)) {
            return bad(format!("tip {t} appears in a seam pair"));
        }
        if self.kind == MeshKind::Sphere {
            for (i, p) in self.vertices.iter().enumerate() {
                let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                if (n - 1.0).abs() > 1e-12 {
                    return bad(format!("sphere vertex {i} has norm {n}"));
                }
            }
        }
        if let Cells::Triangles(tris) = &self.cells {
            // consistent orientation: every interior edge is traversed once in
            // each direction
            let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
            for t in tris {
                for k in 0..3 {
                    *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
                }
            }
            for (&(a, b), &n) in &directed {
                if n > 1 || directed.get(&(b, a)).copied().unwrap_or(0) > 1 {
                    return bad(format!("edge ({a}, {b}) is traversed inconsistently"));
                }
            }
        }
        Ok(())
    }

    /// Merges the selected seam pairs back into single DOFs, producing the
    /// mesh of a smaller crack on the same triangles. The DOF space of the
    /// result embeds in the DOF space of `self`.
    pub fn close_seams<F: Fn(usize) -> bool>(&self, close: F) -> SlitMesh {
        let mut target: Vec<usize> = (0..self.vertices.len()).collect();
        let mut keep_pairs = Vec::new();
        for (k, &(l, r)) in self.seam_pairs.iter().enumerate() {
            if close(k) {
                target[r] = l;
            } else {
                keep_pairs.push((l, r));
            }
        }
        // renumber surviving DOFs in order
        let mut new_index = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for v in 0..self.vertices.len() {
            if target[v] == v {
                new_index[v] = vertices.len();
                vertices.push(self.vertices[v]);
            }
        }
        let map = |v: usize| new_index[target[v]];
        let cells = match &self.cells {
            Cells::Triangles(t) => Cells::Triangles(t.iter().map(|c| c.map(map)).collect()),
            Cells::Segments(s) => Cells::Segments(s.iter().map(|c| c.map(map)).collect()),
        };
        let seam_pairs: Vec<(usize, usize)> = keep_pairs.iter().map(|&(l, r)| (map(l), map(r))).collect();
        // a closed DOF next to a surviving seam becomes a tip
        let split: HashSet<usize> = seam_pairs.iter().flat_map(|&(l, r)| [l, r]).collect();
        let mut tips: Vec<usize> = self.tip_vertices.iter().map(|&t| map(t)).collect();
        let mut neighbours: HashMap<usize, Vec<usize>> = HashMap::new();
        for (a, b) in self.edges() {
            neighbours.entry(a).or_default().push(b);
            neighbours.entry(b).or_default().push(a);
        }
        for (k, &(l, _)) in self.seam_pairs.iter().enumerate() {
            if close(k) {
                let touches = neighbours
                    .get(&l)
                    .is_some_and(|ns| ns.iter().any(|&n| split.contains(&map(n))));
                if touches {
                    tips.push(map(l));
                }
            }
        }
        tips.retain(|t| !split.contains(t));
        SlitMesh::assemble(self.kind, vertices, cells, seam_pairs, tips, self.generation, self.crack.clone())
    }
}

/// Union-find labelling of cells connected through shared DOFs.
fn label_components(n_vertices: usize, cells: &Cells) -> (Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..n_vertices).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for c in 0..cells.len() {
        let cell = cells.cell(c);
        let r0 = find(&mut parent, cell[0]);
        for &v in &cell[1..] {
            let r = find(&mut parent, v);
            if r != r0 {
                parent[r] = r0;
            }
        }
    }
    let mut label: HashMap<usize, usize> = HashMap::new();
    let mut out = Vec::with_capacity(cells.len());
    for c in 0..cells.len() {
        let root = find(&mut parent, cells.cell(c)[0]);
        let next = label.len();
        out.push(*label.entry(root).or_insert(next));
    }
    let n = label.len();
    (out, n)
}

fn longest_edge(vertices: &[[f64; 3]], cells: &Cells) -> f64 {
    let mut h: f64 = 0.0;
    for c in 0..cells.len() {
        let cell = cells.cell(c);
        for k in 0..cell.len() {
            let a = vertices[cell[k]];
            let b = vertices[cell[(k + 1) % cell.len()]];
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            h = h.max(d);
        }
    }
    h
}

/// Fixes the orientation of a triangle so that its normal points along
/// `outward`.
pub(crate) fn orient(tri: [usize; 3], vertices: &[[f64; 3]], outward: [f64; 3]) -> [usize; 3] {
    let [a, b, c] = tri;
    let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
    let u = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
    let v = [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]];
    let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    if n[0] * outward[0] + n[1] * outward[1] + n[2] * outward[2] < 0.0 {
        [a, c, b]
    } else {
        tri
    }
}

pub(crate) fn check_budget(vertices: usize) -> Result<()> {
    if vertices > MAX_VERTICES {
        return Err(Error::Resource(format!(
            "mesh would have {vertices} vertices (limit {MAX_VERTICES})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn closing_all_seams_recovers_uncut_topology() {
        let crack = CrackSpec::sphere_arc(PI / 2.0).unwrap();
        let mesh = build_slit_sphere(&crack, 1, 2.0).unwrap();
        assert_eq!(mesh.euler_characteristic(), 1);
        let closed = mesh.close_seams(|_| true);
        assert_eq!(closed.euler_characteristic(), 2);
        assert!(closed.seam_pairs().is_empty());
        assert_eq!(closed.dof_count(), mesh.dof_count() - mesh.seam_pairs().len());
    }

    #[test]
    fn partial_closing_creates_new_tips() {
        let crack = CrackSpec::sphere_arc(PI / 2.0).unwrap();
        let mesh = build_slit_sphere(&crack, 1, 2.0).unwrap();
        let n = mesh.seam_pairs().len();
        // keep only the middle third of the seam open
        let closed = mesh.close_seams(|k| k < n / 3 || k >= 2 * n / 3);
        closed.validate().unwrap();
        assert_eq!(closed.euler_characteristic(), 1);
        assert!(closed.tip_vertices().len() >= 2);
    }

    #[test]
    fn sides_follow_seam_pairs() {
        let crack = CrackSpec::disk(&[(0.0, 1.0)]).unwrap();
        let mesh = build_slit_disk(&crack, 1, 2.0).unwrap();
        let (l, r) = mesh.seam_pairs()[0];
        assert_eq!(mesh.side_of(l), CrackSide::Upper);
        assert_eq!(mesh.side_of(r), CrackSide::Lower);
        assert_eq!(mesh.side_of(mesh.tip_vertices()[0]), CrackSide::Off);
    }
}
