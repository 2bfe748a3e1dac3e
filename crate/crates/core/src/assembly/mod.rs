//! P1 finite-element forms on slit meshes.

mod clip;
mod flux;
mod local;
mod operator;
mod weighted;

use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

pub use clip::{circle_arcs, triangle_disk_area};
pub use flux::{ball_energy, boundary_flux, BoundaryFlux, ComponentBoundary};
pub use local::TriangleGeometry;
pub use operator::{OperatorKind, SparseSymOperator};
pub use weighted::weight_integral;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::slitmesh::{Cells, CrackSide, MeshKind, SlitMesh};

/// Boundary condition a field was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldCondition {
    /// Sampled or otherwise unconstrained.
    Free,
    Neumann,
    Dirichlet,
}

/// Per-DOF coefficients of a P1 function on a particular mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    mesh_id: u64,
    condition: FieldCondition,
}

impl ScalarField {
    pub fn new(mesh: &SlitMesh, values: Vec<f64>, condition: FieldCondition) -> Result<Self> {
        if values.len() != mesh.dof_count() {
            return Err(Error::Input(format!(
                "field has {} values for {} DOFs",
                values.len(),
                mesh.dof_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("field value {i} is not finite")));
        }
        Ok(Self { values, mesh_id: mesh_fingerprint(mesh), condition })
    }

    /// Nodal interpolant of `f(point, side)`.
    pub fn interpolate<F: Fn(&[f64; 3], CrackSide) -> f64>(mesh: &SlitMesh, f: F) -> Result<Self> {
        Self::new(mesh, mesh.sample(f), FieldCondition::Free)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn condition(&self) -> FieldCondition {
        self.condition
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn belongs_to(&self, mesh: &SlitMesh) -> bool {
        self.mesh_id == mesh_fingerprint(mesh)
    }

    pub(crate) fn check(&self, mesh: &SlitMesh) -> Result<()> {
        if self.belongs_to(mesh) {
            Ok(())
        } else {
            Err(Error::Input("field was built on a different mesh".into()))
        }
    }
}

/// Cheap identity of a mesh used to match fields to meshes.
pub fn mesh_fingerprint(mesh: &SlitMesh) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    mesh.kind().hash(&mut h);
    mesh.dof_count().hash(&mut h);
    mesh.cells().len().hash(&mut h);
    mesh.generation().hash(&mut h);
    mesh.h_max().to_bits().hash(&mut h);
    mesh.seam_pairs().hash(&mut h);
    for p in mesh.vertices().iter().step_by((mesh.dof_count() / 64).max(1)) {
        p.map(f64::to_bits).hash(&mut h);
    }
    h.finish()
}

fn triangle_geometry(mesh: &SlitMesh, i: usize) -> Result<TriangleGeometry> {
    let v = mesh.vertices();
    let t = mesh.triangles()[i];
    TriangleGeometry::new(i, [&v[t[0]], &v[t[1]], &v[t[2]]])
}

fn segment_length(mesh: &SlitMesh, s: [usize; 2], index: usize) -> Result<f64> {
    let (a, b) = (mesh.vertices()[s[0]], mesh.vertices()[s[1]]);
    let l = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    if !(l > 0.0) {
        return Err(Error::DegenerateTriangle { index, area: 0.0 });
    }
    Ok(l)
}

/// Scatters per-cell local matrices in cell order.
fn scatter<const K: usize>(
    mesh: &SlitMesh,
    locals: Vec<Result<[[f64; K]; K]>>,
    kind: OperatorKind,
) -> Result<SparseSymOperator> {
    let mut triplets = Vec::with_capacity(K * K * locals.len());
    for (i, local) in locals.into_iter().enumerate() {
        let local = local?;
        let cell = mesh.cells().cell(i);
        for a in 0..K {
            for b in 0..K {
                triplets.push((cell[a], cell[b], local[a][b]));
            }
        }
    }
    Ok(SparseSymOperator::from_triplets(mesh.dof_count(), &triplets, kind))
}

/// P1 stiffness matrix with flat-triangle gradients. Seam DOFs are distinct,
/// so nothing couples across the crack.
pub fn assemble_stiffness(mesh: &SlitMesh, exec: Execution) -> Result<SparseSymOperator> {
    match mesh.cells() {
        Cells::Triangles(t) => {
            let locals = map_indexed(exec, t.len(), |i| triangle_geometry(mesh, i).map(|g| g.stiffness()));
            scatter(mesh, locals, OperatorKind::Stiffness)
        }
        Cells::Segments(s) => {
            let locals = map_indexed(exec, s.len(), |i| {
                segment_length(mesh, s[i], i).map(|l| [[1.0 / l, -1.0 / l], [-1.0 / l, 1.0 / l]])
            });
            scatter(mesh, locals, OperatorKind::Stiffness)
        }
    }
}

/// Consistent P1 mass matrix, or its row-sum lumped diagonal.
pub fn assemble_mass(mesh: &SlitMesh, lumped: bool, exec: Execution) -> Result<SparseSymOperator> {
    let consistent = match mesh.cells() {
        Cells::Triangles(t) => {
            let locals = map_indexed(exec, t.len(), |i| triangle_geometry(mesh, i).map(|g| g.consistent_mass()));
            scatter(mesh, locals, OperatorKind::Mass)?
        }
        Cells::Segments(s) => {
            let locals = map_indexed(exec, s.len(), |i| {
                segment_length(mesh, s[i], i).map(|l| [[l / 3.0, l / 6.0], [l / 6.0, l / 3.0]])
            });
            scatter(mesh, locals, OperatorKind::Mass)?
        }
    };
    if lumped {
        Ok(SparseSymOperator::diagonal_matrix(&consistent.row_sums(), OperatorKind::Mass))
    } else {
        Ok(consistent)
    }
}

fn planar_triangle(mesh: &SlitMesh, i: usize) -> [[f64; 2]; 3] {
    let v = mesh.vertices();
    mesh.triangles()[i].map(|k| [v[k][0], v[k][1]])
}

fn require_planar(mesh: &SlitMesh) -> Result<()> {
    if mesh.kind() != MeshKind::Disk {
        return Err(Error::Input(format!("weighted forms need a planar disk mesh, got {:?}", mesh.kind())));
    }
    Ok(())
}

/// Stiffness with each element scaled by the mean of `|x|^(2-n)` over it,
/// which is exact for P1 fields since their gradients are elementwise
/// constant.
pub fn assemble_weighted_stiffness(mesh: &SlitMesh, n: u32, exec: Execution) -> Result<SparseSymOperator> {
    require_planar(mesh)?;
    let locals = map_indexed(exec, mesh.triangles().len(), |i| {
        let g = triangle_geometry(mesh, i)?;
        let mut k = g.stiffness();
        if n != 2 {
            let w = weight_integral(&planar_triangle(mesh, i), n)? / g.area;
            for row in &mut k {
                for v in row.iter_mut() {
                    *v *= w;
                }
            }
        }
        Ok(k)
    });
    scatter(mesh, locals, OperatorKind::WeightedStiffness)
}

/// `int |grad u|^2 |x|^(2-n)` over a planar mesh.
pub fn assemble_weighted_energy(mesh: &SlitMesh, field: &ScalarField, n: u32, exec: Execution) -> Result<f64> {
    require_planar(mesh)?;
    field.check(mesh)?;
    if !(2..=3).contains(&n) {
        return Err(Error::Input(format!("N must be 2 or 3, got {n}")));
    }
    let u = field.values();
    let parts = map_indexed(exec, mesh.triangles().len(), |i| -> Result<f64> {
        let g = triangle_geometry(mesh, i)?;
        let t = mesh.triangles()[i];
        let grad = g.gradient([u[t[0]], u[t[1]], u[t[2]]]);
        let g2 = local::dot(&grad, &grad);
        if g2 == 0.0 {
            return Ok(0.0);
        }
        Ok(g2 * weight_integral(&planar_triangle(mesh, i), n)?)
    });
    parts.into_iter().sum()
}

/// Mass-weighted mean of `u` on each connected component.
pub fn component_means(mesh: &SlitMesh, mass: &SparseSymOperator, u: &[f64]) -> Vec<f64> {
    let comp = mesh.dof_components();
    let mu = mass.apply(u);
    let ones = mass.apply(&vec![1.0; u.len()]);
    let mut num = vec![0.0; mesh.components()];
    let mut den = vec![0.0; mesh.components()];
    for i in 0..u.len() {
        num[comp[i]] += mu[i];
        den[comp[i]] += ones[i];
    }
    num.iter().zip(&den).map(|(n, d)| n / d).collect()
}

/// `u` with its per-component means removed.
pub fn remove_component_means(mesh: &SlitMesh, mass: &SparseSymOperator, u: &[f64]) -> Vec<f64> {
    let means = component_means(mesh, mass, u);
    let comp = mesh.dof_components();
    u.iter().enumerate().map(|(i, v)| v - means[comp[i]]).collect()
}
