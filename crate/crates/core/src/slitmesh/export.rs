use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Cells, MeshKind, SlitMesh};
use crate::error::{Error, Result};

/// Crack bookkeeping written next to an OFF file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSidecar {
    pub kind: MeshKind,
    pub seam_pairs: Vec<(usize, usize)>,
    pub tip_vertices: Vec<usize>,
    pub components: usize,
    pub h_max: f64,
    pub generation: u32,
}

impl MeshSidecar {
    pub fn from_mesh(mesh: &SlitMesh) -> Self {
        Self {
            kind: mesh.kind(),
            seam_pairs: mesh.seam_pairs().to_vec(),
            tip_vertices: mesh.tip_vertices().to_vec(),
            components: mesh.components(),
            h_max: mesh.h_max(),
            generation: mesh.generation(),
        }
    }
}

/// Writes the mesh as an OFF file: header, `V E F`, one vertex per line,
/// then one face per line prefixed by its vertex count. Circle graphs write
/// their segments as two-vertex faces.
pub fn write_off<W: Write>(mesh: &SlitMesh, mut out: W) -> Result<()> {
    let edges = mesh.edges().len();
    writeln!(out, "OFF")?;
    // OFF orders the counts as vertices, faces, edges
    writeln!(out, "{} {} {}", mesh.dof_count(), mesh.cells().len(), edges)?;
    for p in mesh.vertices() {
        writeln!(out, "{:.17e} {:.17e} {:.17e}", p[0], p[1], p[2])?;
    }
    match mesh.cells() {
        Cells::Triangles(t) => {
            for c in t {
                writeln!(out, "3 {} {} {}", c[0], c[1], c[2])?;
            }
        }
        Cells::Segments(s) => {
            for c in s {
                writeln!(out, "2 {} {}", c[0], c[1])?;
            }
        }
    }
    Ok(())
}

/// Reads back the `(vertices, faces, edges)` counts of an OFF file.
pub fn read_off_counts<R: BufRead>(input: R) -> Result<(usize, usize, usize)> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != "OFF" {
        return Err(Error::Input(format!("not an OFF file (header {header:?})")));
    }
    let counts = lines.next().transpose()?.unwrap_or_default();
    let nums: Vec<usize> = counts
        .split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|e| Error::Input(e.to_string())))
        .collect::<Result<_>>()?;
    if nums.len() != 3 {
        return Err(Error::Input(format!("bad OFF count line {counts:?}")));
    }
    Ok((nums[0], nums[1], nums[2]))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::super::{build_slit_sphere, CrackSpec};
    use super::*;

    #[test]
    fn off_round_trip_counts() {
        let mesh = build_slit_sphere(&CrackSpec::sphere_arc(PI / 2.0).unwrap(), 1, 2.0).unwrap();
        let mut buf = Vec::new();
        write_off(&mesh, &mut buf).unwrap();
        let (v, f, e) = read_off_counts(buf.as_slice()).unwrap();
        assert_eq!(v, mesh.dof_count());
        assert_eq!(f, mesh.triangles().len());
        assert_eq!(e, mesh.edges().len());
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2 + v + f);

        let side = MeshSidecar::from_mesh(&mesh);
        let json = serde_json::to_string(&side).unwrap();
        let back: MeshSidecar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, side);
    }
}
