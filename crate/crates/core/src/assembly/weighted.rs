//! Integrals of the weight `|x|^(2-N)` over planar triangles.
//!
//! For N = 3 the weight is `1/|x|`. Triangles containing the origin are
//! split into a fan at the origin and each fan triangle is integrated with a
//! Duffy collapse, which cancels the singularity. Other triangles are
//! subdivided 1-to-4 until the degree-5 rule stops changing.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, TRIANGLE7};

pub type P2 = [f64; 2];

fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn len(a: P2) -> f64 {
    a[0].hypot(a[1])
}

fn area(p: &[P2; 3]) -> f64 {
    0.5 * cross([p[1][0] - p[0][0], p[1][1] - p[0][1]], [p[2][0] - p[0][0], p[2][1] - p[0][1]]).abs()
}

/// Relative change between a parent rule and its children below which
/// subdivision stops.
const SPLIT_TOL: f64 = 1e-11;
const MAX_DEPTH: u32 = 10;

/// `int_T |x|^(2-n) dA` for a planar triangle and `n` in {2, 3}.
pub fn weight_integral(p: &[P2; 3], n: u32) -> Result<f64> {
    match n {
        2 => Ok(area(p)),
        3 => inverse_radius_integral(p),
        _ => Err(Error::Input(format!("weight exponent needs N in {{2, 3}}, got {n}"))),
    }
}

fn inverse_radius_integral(p: &[P2; 3]) -> Result<f64> {
    let scale = p.iter().map(|q| len(*q)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if contains_origin(p, 1e-14 * scale) {
        let mut total = 0.0;
        for k in 0..3 {
            total += fan_piece(p[k], p[(k + 1) % 3])?;
        }
        return Ok(total);
    }
    Ok(subdivide(p, rule(p), 0))
}

fn contains_origin(p: &[P2; 3], tol: f64) -> bool {
    let o = [0.0, 0.0];
    let d0 = orient(p[0], p[1], o);
    let d1 = orient(p[1], p[2], o);
    let d2 = orient(p[2], p[0], o);
    let s = orient(p[0], p[1], p[2]).signum();
    let tol = tol * tol.max(1.0);
    s * d0 >= -tol && s * d1 >= -tol && s * d2 >= -tol
}

fn orient(a: P2, b: P2, c: P2) -> f64 {
    cross([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]])
}

/// Unsigned `int 1/|x|` over the triangle `(0, a, b)` via the Duffy map
/// `x = u (a + v (b - a))`, which turns the integral into
/// `|a x b| int_0^1 dv / |a + v (b - a)|`.
fn fan_piece(a: P2, b: P2) -> Result<f64> {
    let c = cross(a, b).abs();
    if c == 0.0 {
        return Ok(0.0);
    }
    let d = [b[0] - a[0], b[1] - a[1]];
    let v = integrate(|v| 1.0 / len([a[0] + v * d[0], a[1] + v * d[1]]), 0.0, 1.0, 0.0, 1e-13)?;
    Ok(c * v)
}

fn rule(p: &[P2; 3]) -> f64 {
    let a = area(p);
    TRIANGLE7
        .iter()
        .map(|(l, w)| {
            let x = l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0];
            let y = l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1];
            w / x.hypot(y)
        })
        .sum::<f64>()
        * a
}

fn subdivide(p: &[P2; 3], coarse: f64, depth: u32) -> f64 {
    let mid = |a: P2, b: P2| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let (m01, m12, m20) = (mid(p[0], p[1]), mid(p[1], p[2]), mid(p[2], p[0]));
    let children = [[p[0], m01, m20], [m01, p[1], m12], [m20, m12, p[2]], [m01, m12, m20]];
    let values = children.map(|c| rule(&c));
    let fine: f64 = values.iter().sum();
    if (fine - coarse).abs() <= SPLIT_TOL * fine.abs() || depth >= MAX_DEPTH {
        return fine;
    }
    children.iter().zip(values).map(|(c, v)| subdivide(c, v, depth + 1)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed form: over the fan triangle (0, a, b) the integral of 1/|x| is
    /// `p (asinh(t_b) - asinh(t_a))`, with `p` the distance from the origin to
    /// the line ab and `t` the signed tangential offset along it divided by p.
    fn exact_fan(a: P2, b: P2) -> f64 {
        let d = [b[0] - a[0], b[1] - a[1]];
        let l = len(d);
        let u = [d[0] / l, d[1] / l];
        let p = cross(a, u).abs();
        let ta = a[0] * u[0] + a[1] * u[1];
        let tb = b[0] * u[0] + b[1] * u[1];
        p * ((tb / p).asinh() - (ta / p).asinh())
    }

    fn exact(p: &[P2; 3]) -> f64 {
        let s = orient(p[0], p[1], p[2]).signum();
        (0..3)
            .filter(|&k| cross(p[k], p[(k + 1) % 3]) != 0.0)
            .map(|k| s * cross(p[k], p[(k + 1) % 3]).signum() * exact_fan(p[k], p[(k + 1) % 3]))
            .sum()
    }

    #[test]
    fn matches_closed_form_away_from_origin() {
        let t = [[0.2, 0.1], [0.5, 0.05], [0.3, 0.4]];
        let v = weight_integral(&t, 3).unwrap();
        assert!((v - exact(&t)).abs() < 1e-12 * v, "{v} {}", exact(&t));
    }

    #[test]
    fn matches_closed_form_with_origin_inside_or_at_vertex() {
        for t in [
            [[-0.3, -0.2], [0.4, -0.1], [0.05, 0.5]],
            [[0.0, 0.0], [0.4, 0.0], [0.1, 0.3]],
            [[-0.2, 0.0], [0.3, 0.0], [0.0, 0.25]],
        ] {
            let v = weight_integral(&t, 3).unwrap();
            assert!((v - exact(&t)).abs() < 1e-11 * v, "{t:?}: {v} {}", exact(&t));
        }
    }

    #[test]
    fn close_to_origin_but_outside() {
        let t = [[1e-4, 1e-4], [0.2, 0.0], [0.1, 0.2]];
        let v = weight_integral(&t, 3).unwrap();
        assert!((v - exact(&t)).abs() < 1e-10 * v);
    }

    #[test]
    fn planar_weight_is_area() {
        let t = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert_eq!(weight_integral(&t, 2).unwrap(), 0.5);
        assert!(weight_integral(&t, 4).is_err());
    }
}
