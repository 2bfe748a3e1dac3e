//! Exact intersections of planar triangles with origin-centred disks and
//! circles.

use std::f64::consts::{PI, TAU};

use super::weighted::P2;

fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Parameters `t` in the open interval (0, 1) where the segment `a + t (b - a)`
/// crosses the circle of radius `r`.
fn crossings(a: P2, b: P2, r: f64) -> Vec<f64> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let qa = dot(d, d);
    if qa == 0.0 {
        return Vec::new();
    }
    let qb = 2.0 * dot(a, d);
    let qc = dot(a, a) - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    // numerically stable pair of roots
    let q = -0.5 * (qb + qb.signum() * s);
    let mut roots = if q == 0.0 {
        vec![0.0]
    } else {
        vec![q / qa, qc / q]
    };
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots.retain(|&t| t > 0.0 && t < 1.0);
    roots
}

/// Signed area of the intersection of the fan triangle `(0, a, b)` with the
/// disk of radius `r`.
fn fan_area(a: P2, b: P2, r: f64) -> f64 {
    let mut ts = vec![0.0];
    ts.extend(crossings(a, b, r));
    ts.push(1.0);
    let at = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let mut s = 0.0;
    for w in ts.windows(2) {
        let (p, q) = (at(w[0]), at(w[1]));
        let m = at(0.5 * (w[0] + w[1]));
        if dot(m, m) <= r * r {
            s += 0.5 * cross(p, q);
        } else {
            s += 0.5 * r * r * cross(p, q).atan2(dot(p, q));
        }
    }
    s
}

/// Area of `T` intersected with the disk of radius `r` about the origin.
pub fn triangle_disk_area(p: &[P2; 3], r: f64) -> f64 {
    (0..3).map(|k| fan_area(p[k], p[(k + 1) % 3], r)).sum::<f64>().abs()
}

fn inside(p: &[P2; 3], x: P2) -> bool {
    let o = |a: P2, b: P2| cross([b[0] - a[0], b[1] - a[1]], [x[0] - a[0], x[1] - a[1]]);
    let s = cross([p[1][0] - p[0][0], p[1][1] - p[0][1]], [p[2][0] - p[0][0], p[2][1] - p[0][1]]);
    let tol = -1e-13 * s.abs();
    let d = [o(p[0], p[1]), o(p[1], p[2]), o(p[2], p[0])];
    d.iter().all(|&v| v * s.signum() >= tol)
}

/// Angular intervals `(start, end)` of the circle of radius `r` lying inside
/// the triangle, with `-pi <= start < end <= pi`. An interval crossing the
/// angle pi is returned in two pieces.
pub fn circle_arcs(p: &[P2; 3], r: f64) -> Vec<(f64, f64)> {
    let mut angles = Vec::new();
    for k in 0..3 {
        let (a, b) = (p[k], p[(k + 1) % 3]);
        for t in crossings(a, b, r) {
            angles.push((a[1] + t * (b[1] - a[1])).atan2(a[0] + t * (b[0] - a[0])));
        }
        // vertices on the circle are not strict crossings
        if (a[0].hypot(a[1]) - r).abs() <= 1e-14 * r {
            angles.push(a[1].atan2(a[0]));
        }
    }
    let on_circle = |t: f64| [r * t.cos(), r * t.sin()];
    if angles.is_empty() {
        return if inside(p, on_circle(0.0)) { vec![(-PI, PI)] } else { Vec::new() };
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
    let n = angles.len();
    let mut arcs = Vec::new();
    for i in 0..n {
        let s = angles[i];
        let e = if i + 1 < n { angles[i + 1] } else { angles[0] + TAU };
        if e - s < 1e-15 {
            continue;
        }
        if inside(p, on_circle(0.5 * (s + e))) {
            push_normalized(&mut arcs, s, e);
        }
    }
    arcs
}

fn push_normalized(arcs: &mut Vec<(f64, f64)>, mut s: f64, mut e: f64) {
    if s >= PI - 1e-14 {
        s -= TAU;
        e -= TAU;
    }
    if e > PI + 1e-14 {
        arcs.push((s, PI));
        arcs.push((-PI, e - TAU));
    } else {
        arcs.push((s, e.min(PI)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_area_limits() {
        let t = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!((triangle_disk_area(&t, 10.0) - 0.5).abs() < 1e-15);
        // quarter disk of radius 0.5 fits inside
        assert!((triangle_disk_area(&t, 0.5) - PI / 16.0).abs() < 1e-15);
        let far = [[2.0, 2.0], [3.0, 2.0], [2.0, 3.0]];
        assert_eq!(triangle_disk_area(&far, 1.0), 0.0);
    }

    #[test]
    fn disk_area_of_partially_covered_square() {
        // the square [-1,1]^2 as two triangles, disk radius 1.2
        let r: f64 = 1.2;
        let a = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0]];
        let b = [[-1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        let total = triangle_disk_area(&a, r) + triangle_disk_area(&b, r);
        // disk minus four circular caps beyond |x| = 1
        let theta = (1.0 / r).acos();
        let cap = r * r * (theta - theta.sin() * theta.cos());
        assert!((total - (PI * r * r - 4.0 * cap)).abs() < 1e-13);
    }

    #[test]
    fn arcs_cover_circle_exactly_once() {
        // a fan of triangles around the origin
        let n = 7;
        let r = 0.6;
        let mut sum = 0.0;
        for k in 0..n {
            let a = TAU * k as f64 / n as f64 + 0.1;
            let b = TAU * (k + 1) as f64 / n as f64 + 0.1;
            let t = [[0.0, 0.0], [a.cos(), a.sin()], [b.cos(), b.sin()]];
            for (s, e) in circle_arcs(&t, r) {
                assert!(-PI <= s && s < e && e <= PI);
                sum += e - s;
            }
        }
        assert!((sum - TAU).abs() < 1e-12);
    }

    #[test]
    fn whole_circle_inside() {
        let t = [[-3.0, -3.0], [3.0, -3.0], [0.0, 3.0]];
        assert_eq!(circle_arcs(&t, 0.5), vec![(-PI, PI)]);
    }
}
