use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::clip::{circle_arcs, triangle_disk_area};
use super::{planar_triangle, require_planar, triangle_geometry, ScalarField};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::quadrature::gauss_legendre;
use crate::slitmesh::SlitMesh;

/// Boundary integrals over one connected arc `U_i` of the circle minus the
/// crack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentBoundary {
    pub length: f64,
    /// Arc-length mean `m_i` of `u`.
    pub mean: f64,
    /// `int (u - m_i) du/dnu`.
    pub flux: f64,
    /// `int |grad u|^2`.
    pub energy: f64,
    /// `int (u - m_i)^2`.
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFlux {
    pub radius: f64,
    pub components: Vec<ComponentBoundary>,
}

impl BoundaryFlux {
    pub fn flux(&self) -> f64 {
        self.components.iter().map(|c| c.flux).sum()
    }

    pub fn energy(&self) -> f64 {
        self.components.iter().map(|c| c.energy).sum()
    }

    pub fn l2(&self) -> f64 {
        self.components.iter().map(|c| c.l2).sum()
    }
}

fn domain_radius(mesh: &SlitMesh) -> f64 {
    mesh.vertices().iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max)
}

fn check_radius(mesh: &SlitMesh, r: f64) -> Result<()> {
    let big = domain_radius(mesh);
    if !(r > 0.0 && r < big) {
        return Err(Error::Range(format!("radius {r} outside (0, {big})")));
    }
    Ok(())
}

/// Linear data of the field on one triangle: value at the first vertex,
/// the vertex itself and the planar gradient.
struct Linear {
    p0: [f64; 2],
    u0: f64,
    g: [f64; 2],
}

impl Linear {
    fn at(&self, x: [f64; 2]) -> f64 {
        self.u0 + self.g[0] * (x[0] - self.p0[0]) + self.g[1] * (x[1] - self.p0[1])
    }
}

fn linear(mesh: &SlitMesh, field: &ScalarField, i: usize) -> Result<Linear> {
    let geom = triangle_geometry(mesh, i)?;
    let t = mesh.triangles()[i];
    let u = field.values();
    let g = geom.gradient([u[t[0]], u[t[1]], u[t[2]]]);
    let p = planar_triangle(mesh, i);
    Ok(Linear { p0: p[0], u0: u[t[0]], g: [g[0], g[1]] })
}

/// `int_{B_r} |grad u|^2` with exact triangle-disk clipping.
pub fn ball_energy(mesh: &SlitMesh, field: &ScalarField, r: f64, exec: Execution) -> Result<f64> {
    require_planar(mesh)?;
    field.check(mesh)?;
    if !(r >= 0.0) {
        return Err(Error::Range(format!("radius {r} must be non-negative")));
    }
    let parts = map_indexed(exec, mesh.triangles().len(), |i| -> Result<f64> {
        let area = triangle_disk_area(&planar_triangle(mesh, i), r);
        if area == 0.0 {
            return Ok(0.0);
        }
        let l = linear(mesh, field, i)?;
        Ok((l.g[0] * l.g[0] + l.g[1] * l.g[1]) * area)
    });
    parts.into_iter().sum()
}

/// Boundary integrals over the circle of radius `r`, split into the arcs
/// left after removing the crack.
pub fn boundary_flux(mesh: &SlitMesh, field: &ScalarField, r: f64) -> Result<BoundaryFlux> {
    require_planar(mesh)?;
    field.check(mesh)?;
    check_radius(mesh, r)?;

    let mut pieces: Vec<(f64, f64, usize)> = Vec::new();
    for i in 0..mesh.triangles().len() {
        let p = planar_triangle(mesh, i);
        if p.iter().all(|q| q[0].hypot(q[1]) < r) {
            continue;
        }
        for (s, e) in circle_arcs(&p, r) {
            pieces.push((s, e, i));
        }
    }
    pieces.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // Slits lie on the ray at angle pi. If the circle meets one, the walk
    // from -pi to pi is the single open arc left; otherwise it is the whole
    // loop. Either way there is one component.
    let gap_tol = 1e-9;
    let covered = pieces.first().is_some_and(|p| (p.0 + PI).abs() < gap_tol)
        && pieces.last().is_some_and(|p| (p.1 - PI).abs() < gap_tol);
    if !covered {
        return Err(Error::Range(format!("circle of radius {r} is not covered by the mesh")));
    }
    let mut last_end = -PI;
    for piece in &pieces {
        if piece.0 > last_end + gap_tol {
            return Err(Error::Range(format!("circle of radius {r} leaves the mesh near angle {last_end}")));
        }
        last_end = last_end.max(piece.1);
    }
    let groups = [pieces];

    let (gx, gw) = gauss_legendre(8);
    let mut components = Vec::with_capacity(groups.len());
    for group in &groups {
        let lins: Vec<Linear> = group.iter().map(|&(_, _, i)| linear(mesh, field, i)).collect::<Result<_>>()?;
        let sample = |f: &dyn Fn(&Linear, [f64; 2]) -> f64| -> f64 {
            let mut s = 0.0;
            for (&(a, b, _), lin) in group.iter().zip(&lins) {
                let h = 0.5 * (b - a);
                let c = 0.5 * (a + b);
                for (x, w) in gx.iter().zip(&gw) {
                    let t = c + h * x;
                    s += w * h * r * f(lin, [r * t.cos(), r * t.sin()]);
                }
            }
            s
        };
        let length = sample(&|_, _| 1.0);
        let mean = sample(&|l, x| l.at(x)) / length;
        let flux = sample(&|l, x| (l.at(x) - mean) * (l.g[0] * x[0] + l.g[1] * x[1]) / r);
        let energy = sample(&|l, _| l.g[0] * l.g[0] + l.g[1] * l.g[1]);
        let l2 = sample(&|l, x| (l.at(x) - mean).powi(2));
        components.push(ComponentBoundary { length, mean, flux, energy, l2 });
    }
    Ok(BoundaryFlux { radius: r, components })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::slitmesh::{build_slit_disk, CrackSide, CrackSpec, Domain};

    fn cracktip(p: &[f64; 3], side: CrackSide) -> f64 {
        let mut theta = p[1].atan2(p[0]);
        match side {
            CrackSide::Upper => theta = PI,
            CrackSide::Lower => theta = -PI,
            CrackSide::Off => {}
        }
        let rho = p[0].hypot(p[1]);
        (2.0 * rho / PI).sqrt() * (0.5 * theta).sin()
    }

    #[test]
    fn constant_field_gives_zeros() {
        let mesh = build_slit_disk(&CrackSpec::disk(&[(0.0, 1.0)]).unwrap(), 2, 2.0).unwrap();
        let c = ScalarField::interpolate(&mesh, |_, _| 4.0).unwrap();
        let b = boundary_flux(&mesh, &c, 0.5).unwrap();
        assert_eq!(b.components.len(), 1);
        assert!((b.components[0].length - 0.5 * TAU).abs() < 1e-12);
        assert!((b.components[0].mean - 4.0).abs() < 1e-12);
        assert!(b.flux().abs() < 1e-12 && b.energy().abs() < 1e-12 && b.l2().abs() < 1e-12);
    }

    #[test]
    fn cracktip_boundary_energy_is_one() {
        let mesh = build_slit_disk(&CrackSpec::disk(&[(0.0, 1.0)]).unwrap(), 5, 2.0).unwrap();
        let f = ScalarField::interpolate(&mesh, cracktip).unwrap();
        let b = boundary_flux(&mesh, &f, 0.5).unwrap();
        assert!((b.energy() - 1.0).abs() < 1e-2, "{}", b.energy());
        let e = ball_energy(&mesh, &f, 0.5, Execution::Parallel).unwrap();
        assert!((e - 0.5).abs() < 1e-2, "{e}");
    }

    #[test]
    fn uncut_disk_circle_is_one_loop() {
        let mesh = build_slit_disk(&CrackSpec::none(Domain::Disk2), 3, 1.0).unwrap();
        let f = ScalarField::interpolate(&mesh, |p, _| p[0]).unwrap();
        let b = boundary_flux(&mesh, &f, 0.7).unwrap();
        // u = x: mean 0, flux = int x^2 / r = pi r^2, energy = 2 pi r
        assert!((b.flux() - PI * 0.49).abs() < 1e-10);
        assert!((b.energy() - TAU * 0.7).abs() < 1e-10);
    }

    #[test]
    fn radius_out_of_range() {
        let mesh = build_slit_disk(&CrackSpec::disk(&[(0.0, 1.0)]).unwrap(), 1, 2.0).unwrap();
        let f = ScalarField::interpolate(&mesh, |_, _| 0.0).unwrap();
        assert!(matches!(boundary_flux(&mesh, &f, 0.0), Err(Error::Range(_))));
        assert!(matches!(boundary_flux(&mesh, &f, 1.5), Err(Error::Range(_))));
    }
}
