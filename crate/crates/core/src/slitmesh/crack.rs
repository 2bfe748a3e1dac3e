use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Angular tolerance under which two arc endpoints are treated as touching.
pub const ANGLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Sphere2,
    Disk2,
    Circle1,
}

pub type Frame = [[f64; 3]; 3];

pub const IDENTITY: Frame = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// A crack on the unit sphere, the unit disk or the unit circle.
///
/// * `Sphere2`: closed arcs `[a, b]` of the reference great circle
///   `phi -> (-cos phi, 0, sin phi)`, so `[-beta, beta]` is the arc of
///   aperture `2 beta` centred on `(-1, 0, 0)`. The mesh is built in this
///   reference frame and mapped to world coordinates by `frame`.
/// * `Disk2`: radial segments `[r_in, r_out]` on the negative x-axis.
/// * `Circle1`: removed arcs `[a, b]` of the unit circle; `a == b` removes a
///   single point.
///
/// Arcs are stored merged, sorted and pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrackSpec {
    domain: Domain,
    arcs: Vec<(f64, f64)>,
    frame: Frame,
}

impl CrackSpec {
    pub fn none(domain: Domain) -> Self {
        Self { domain, arcs: Vec::new(), frame: IDENTITY }
    }

    /// Sphere crack from arcs of the reference great circle.
    pub fn sphere(arcs: &[(f64, f64)]) -> Result<Self> {
        let arcs = merge_cyclic(arcs, false)?;
        Ok(Self { domain: Domain::Sphere2, arcs, frame: IDENTITY })
    }

    /// The arc `S_beta = {(-cos phi, 0, sin phi) : |phi| <= beta}`.
    ///
    /// `beta = 0` gives the uncut sphere and `beta = pi` the full great circle.
    pub fn sphere_arc(beta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&beta) || !beta.is_finite() {
            return Err(Error::InvalidCrack(format!("aperture {beta} outside [0, pi]")));
        }
        if beta == 0.0 {
            return Ok(Self::none(Domain::Sphere2));
        }
        Self::sphere(&[(-beta, beta)])
    }

    /// Sphere crack from great-circle arcs given by their unit endpoints in
    /// world coordinates. Each arc is the shorter arc between its endpoints
    /// and every arc must lie on one common great circle.
    pub fn sphere_from_endpoints(arcs: &[([f64; 3], [f64; 3])]) -> Result<Self> {
        if arcs.is_empty() {
            return Ok(Self::none(Domain::Sphere2));
        }
        for (a, b) in arcs {
            for p in [a, b] {
                if (norm(p) - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidCrack(format!("endpoint {p:?} is not on the unit sphere")));
                }
            }
        }
        let (a0, b0) = arcs[0];
        let n = cross(&a0, &b0);
        let nn = norm(&n);
        if nn < 1e-9 {
            return Err(Error::InvalidCrack("first arc has coincident or antipodal endpoints".into()));
        }
        let normal = scale(&n, 1.0 / nn);
        for (a, b) in arcs {
            for p in [a, b] {
                if dot(p, &normal).abs() > 1e-9 {
                    return Err(Error::InvalidCrack(
                        "crack arcs are not contained in one great circle".into(),
                    ));
                }
            }
        }
        // reference axes: x_ref = -(centre of phi = 0), y_ref = plane normal,
        // z_ref = direction of increasing phi at phi = 0
        let e0 = scale(&a0, -1.0);
        let ez = cross(&e0, &normal);
        let ez = scale(&ez, 1.0 / norm(&ez));
        let frame = [
            [e0[0], normal[0], ez[0]],
            [e0[1], normal[1], ez[1]],
            [e0[2], normal[2], ez[2]],
        ];
        // with this frame the reference point (-1, 0, 0) maps to a0, i.e. phi(a0) = 0
        let to_ref = |p: &[f64; 3]| -> [f64; 3] {
            [
                frame[0][0] * p[0] + frame[1][0] * p[1] + frame[2][0] * p[2],
                frame[0][1] * p[0] + frame[1][1] * p[1] + frame[2][1] * p[2],
                frame[0][2] * p[0] + frame[1][2] * p[1] + frame[2][2] * p[2],
            ]
        };
        let phi_of = |p: &[f64; 3]| {
            let q = to_ref(p);
            q[2].atan2(-q[0])
        };
        let mut raw = Vec::with_capacity(arcs.len());
        for (a, b) in arcs {
            let pa = phi_of(a);
            let mut pb = phi_of(b);
            // shorter arc, oriented by increasing phi
            let mut d = pb - pa;
            while d > PI {
                d -= TAU;
            }
            while d <= -PI {
                d += TAU;
            }
            pb = pa + d;
            raw.push(if d >= 0.0 { (pa, pb) } else { (pb, pa) });
        }
        let arcs = merge_cyclic(&raw, false)?;
        Ok(Self { domain: Domain::Sphere2, arcs, frame })
    }

    /// Disk crack from radial segments `[r_in, r_out]` on the negative x-axis.
    pub fn disk(segments: &[(f64, f64)]) -> Result<Self> {
        let mut segs: Vec<(f64, f64)> = Vec::with_capacity(segments.len());
        for &(a, b) in segments {
            if !(a.is_finite() && b.is_finite()) || a < 0.0 || b > 1.0 {
                return Err(Error::InvalidCrack(format!("segment ({a}, {b}) outside [0, 1]")));
            }
            if b - a <= ANGLE_EPS {
                return Err(Error::InvalidCrack(format!("segment ({a}, {b}) has no length")));
            }
            segs.push((a, b));
        }
        segs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for s in segs {
            match merged.last_mut() {
                Some(last) if s.0 < last.1 - ANGLE_EPS => {
                    return Err(Error::InvalidCrack(format!(
                        "segments ({}, {}) and ({}, {}) overlap",
                        last.0, last.1, s.0, s.1
                    )));
                }
                Some(last) if s.0 <= last.1 + ANGLE_EPS => last.1 = s.1,
                _ => merged.push(s),
            }
        }
        Ok(Self { domain: Domain::Disk2, arcs: merged, frame: IDENTITY })
    }

    /// Circle cut set: arcs `[a, b]` with `a <= b`; `a == b` removes a point.
    pub fn circle(cuts: &[(f64, f64)]) -> Result<Self> {
        let arcs = merge_cyclic(cuts, true)?;
        Ok(Self { domain: Domain::Circle1, arcs, frame: IDENTITY })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// True when a sphere or circle crack covers the whole circle.
    pub fn is_full_circle(&self) -> bool {
        self.domain != Domain::Disk2
            && self.arcs.len() == 1
            && self.arcs[0].1 - self.arcs[0].0 >= TAU - ANGLE_EPS
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    /// Maps reference coordinates to world coordinates.
    pub fn to_world(&self, p: &[f64; 3]) -> [f64; 3] {
        let f = &self.frame;
        [
            f[0][0] * p[0] + f[0][1] * p[1] + f[0][2] * p[2],
            f[1][0] * p[0] + f[1][1] * p[1] + f[1][2] * p[2],
            f[2][0] * p[0] + f[2][1] * p[1] + f[2][2] * p[2],
        ]
    }

    /// Maps world coordinates back to the reference frame.
    pub fn to_reference(&self, p: &[f64; 3]) -> [f64; 3] {
        let f = &self.frame;
        [
            f[0][0] * p[0] + f[1][0] * p[1] + f[2][0] * p[2],
            f[0][1] * p[0] + f[1][1] * p[1] + f[2][1] * p[2],
            f[0][2] * p[0] + f[1][2] * p[1] + f[2][2] * p[2],
        ]
    }

    pub fn frame_is_identity(&self) -> bool {
        self.frame == IDENTITY
    }

    /// Whether the disk point `(-r, 0)` lies on the crack.
    pub fn disk_contains_radius(&self, r: f64) -> bool {
        self.domain == Domain::Disk2
            && self.arcs.iter().any(|&(a, b)| r >= a - ANGLE_EPS && r <= b + ANGLE_EPS)
    }

    /// Whether the reference angle `phi` lies on the (closed) sphere crack.
    pub fn sphere_contains_angle(&self, phi: f64) -> bool {
        if self.is_full_circle() {
            return true;
        }
        self.arcs.iter().any(|&(a, b)| {
            let t = (phi - a).rem_euclid(TAU);
            t <= b - a + ANGLE_EPS || t >= TAU - ANGLE_EPS
        })
    }
}

/// Sorts, validates and merges arcs on a circle of length `2 pi`. Touching arcs
/// are merged; overlapping arcs are rejected.
fn merge_cyclic(arcs: &[(f64, f64)], allow_points: bool) -> Result<Vec<(f64, f64)>> {
    let mut items: Vec<(f64, f64)> = Vec::with_capacity(arcs.len());
    for &(a, b) in arcs {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidCrack(format!("arc ({a}, {b}) is not finite")));
        }
        let len = b - a;
        if len < 0.0 || (!allow_points && len <= ANGLE_EPS) {
            return Err(Error::InvalidCrack(format!("arc ({a}, {b}) has no positive length")));
        }
        if len > TAU + ANGLE_EPS {
            return Err(Error::InvalidCrack(format!("arc ({a}, {b}) is longer than the circle")));
        }
        let start = (a + PI).rem_euclid(TAU) - PI;
        items.push((start, start + len.min(TAU)));
    }
    items.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for it in items {
        match merged.last_mut() {
            Some(last) if it.0 < last.1 - ANGLE_EPS => {
                return Err(Error::InvalidCrack(format!(
                    "arcs ({}, {}) and ({}, {}) overlap",
                    last.0, last.1, it.0, it.1
                )));
            }
            Some(last) if it.0 <= last.1 + ANGLE_EPS => last.1 = last.1.max(it.1),
            _ => merged.push(it),
        }
    }
    if merged.len() >= 2 {
        let first = merged[0];
        let last = *merged.last().unwrap();
        if last.1 > first.0 + TAU + ANGLE_EPS {
            return Err(Error::InvalidCrack("arcs overlap across the branch point".into()));
        }
        if last.1 >= first.0 + TAU - ANGLE_EPS {
            merged.pop();
            merged[0] = (last.0, first.1 + TAU);
        }
    }
    if let Some(&(a, b)) = merged.first() {
        if merged.len() == 1 && b - a >= TAU - ANGLE_EPS {
            merged[0] = (a, a + TAU);
        }
    }
    Ok(merged)
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_equator_arc() {
        let c = CrackSpec::sphere_arc(PI / 2.0).unwrap();
        assert_eq!(c.arcs(), &[(-PI / 2.0, PI / 2.0)]);
        assert!(!c.is_full_circle());
        assert!(c.sphere_contains_angle(0.3));
        assert!(!c.sphere_contains_angle(2.0));
    }

    #[test]
    fn touching_arcs_merge_into_full_circle() {
        let c = CrackSpec::sphere(&[(-PI / 2.0, PI / 2.0), (PI / 2.0, 3.0 * PI / 2.0)]).unwrap();
        assert!(c.is_full_circle());
        assert_eq!(c.arcs().len(), 1);
    }

    #[test]
    fn overlapping_and_degenerate_arcs_rejected() {
        assert!(CrackSpec::sphere(&[(0.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(CrackSpec::sphere(&[(0.3, 0.3)]).is_err());
        assert!(CrackSpec::disk(&[(0.1, 0.6), (0.5, 0.9)]).is_err());
        assert!(CrackSpec::disk(&[(0.2, 0.2)]).is_err());
        assert!(CrackSpec::sphere_arc(4.0).is_err());
    }

    #[test]
    fn touching_disk_segments_merge() {
        let c = CrackSpec::disk(&[(0.5, 1.0), (0.0, 0.5)]).unwrap();
        assert_eq!(c.arcs(), &[(0.0, 1.0)]);
        assert!(c.disk_contains_radius(0.7));
    }

    #[test]
    fn circle_points_allowed() {
        let c = CrackSpec::circle(&[(1.0, 1.0)]).unwrap();
        assert_eq!(c.arcs().len(), 1);
        assert_eq!(c.total_length(), 0.0);
    }

    #[test]
    fn endpoints_off_a_common_great_circle_are_rejected() {
        let s = 0.5f64.sqrt();
        let err = CrackSpec::sphere_from_endpoints(&[
            ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            ([0.0, s, s], [0.0, 1.0, 0.0]),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::InvalidCrack(_)));
    }

    #[test]
    fn endpoints_recover_reference_arc() {
        // the half-equator S_{pi/2} given by its endpoints and midpoint
        let c = CrackSpec::sphere_from_endpoints(&[
            ([-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
            ([0.0, 0.0, -1.0], [-1.0, 0.0, 0.0]),
        ])
        .unwrap();
        assert_eq!(c.arcs().len(), 1);
        let (a, b) = c.arcs()[0];
        assert!((b - a - PI).abs() < 1e-12);
        let p = c.to_world(&[-1.0, 0.0, 0.0]);
        assert!((p[0] + 1.0).abs() < 1e-12);
    }
}
