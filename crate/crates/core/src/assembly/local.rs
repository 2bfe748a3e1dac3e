//! Element geometry for flat P1 triangles embedded in 3D and for segments.

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Area and basis-function gradients of a flat triangle.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    pub area: f64,
    /// `grads[i]` is the gradient of the hat function of vertex `i`, tangent
    /// to the triangle's plane.
    pub grads: [Vec3; 3],
    /// Edge opposite vertex `i`: `p[i+2] - p[i+1]`.
    pub edges: [Vec3; 3],
}

impl TriangleGeometry {
    pub fn new(index: usize, p: [&Vec3; 3]) -> Result<Self> {
        let edges = [sub(p[2], p[1]), sub(p[0], p[2]), sub(p[1], p[0])];
        let n = cross(&edges[2], &sub(p[2], p[0]));
        let twice_area = norm(&n);
        let scale = edges.iter().map(|e| dot(e, e)).fold(0.0, f64::max);
        if !(twice_area > 1e-13 * scale) || !twice_area.is_finite() {
            return Err(Error::DegenerateTriangle { index, area: 0.5 * twice_area });
        }
        let unit = [n[0] / twice_area, n[1] / twice_area, n[2] / twice_area];
        let grads = edges.map(|e| {
            let g = cross(&unit, &e);
            [g[0] / twice_area, g[1] / twice_area, g[2] / twice_area]
        });
        Ok(Self { area: 0.5 * twice_area, grads, edges })
    }

    /// P1 stiffness `K_ij = e_i . e_j / (4 A)`.
    pub fn stiffness(&self) -> [[f64; 3]; 3] {
        let mut k = [[0.0; 3]; 3];
        let s = 1.0 / (4.0 * self.area);
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = dot(&self.edges[i], &self.edges[j]) * s;
            }
        }
        k
    }

    pub fn consistent_mass(&self) -> [[f64; 3]; 3] {
        let d = self.area / 6.0;
        let o = self.area / 12.0;
        [[d, o, o], [o, d, o], [o, o, d]]
    }

    /// Gradient of the linear interpolant of `u` at the three vertices.
    /// Written in differences so that constants give exactly zero.
    pub fn gradient(&self, u: [f64; 3]) -> Vec3 {
        let (d1, d2) = (u[1] - u[0], u[2] - u[0]);
        let mut g = [0.0; 3];
        for k in 0..3 {
            g[k] = d1 * self.grads[1][k] + d2 * self.grads[2][k];
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle_stiffness() {
        let p = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let g = TriangleGeometry::new(0, [&p[0], &p[1], &p[2]]).unwrap();
        assert_eq!(g.area, 0.5);
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        let k = g.stiffness();
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gradients_reproduce_linear_functions() {
        let p = [[0.3, -0.2, 0.1], [1.1, 0.4, -0.3], [0.2, 0.9, 0.5]];
        let g = TriangleGeometry::new(0, [&p[0], &p[1], &p[2]]).unwrap();
        // u = c . x restricted to the plane has tangential gradient = projection of c
        let c = [0.7, -1.3, 0.4];
        let u = p.map(|q| dot(&c, &q));
        let grad = g.gradient(u);
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            let e = sub(&p[b], &p[a]);
            assert!((dot(&grad, &e) - (u[b] - u[a])).abs() < 1e-14);
        }
        let n = cross(&sub(&p[1], &p[0]), &sub(&p[2], &p[0]));
        assert!(dot(&grad, &n).abs() < 1e-14);
    }

    #[test]
    fn zero_area_rejected() {
        let p = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        let err = TriangleGeometry::new(7, [&p[0], &p[1], &p[2]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateTriangle { index: 7, .. }));
    }
}
