//! Closed-form fields: the crack-tip function, its product with a line, and
//! harmonic polynomials plus a crack-tip term.
//!
//! The crack is the half-plane `{y = 0, x <= 0}` (a half-line in 2D), and
//! the angle `theta = atan2(y, x)` has its branch cut on it. Points on the
//! crack need an explicit side: `Upper` means `theta = pi`, `Lower` means
//! `theta = -pi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::{FieldCondition, ScalarField};
use crate::error::{Error, Result};
use crate::slitmesh::{CrackSide, SlitMesh};

/// Harmonic polynomial of degree at most two plus a multiple of the
/// crack-tip function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicPoly {
    pub dim: u32,
    pub constant: f64,
    pub cracktip: f64,
    pub linear: [f64; 3],
    /// Symmetric and traceless, so `x^T Q x` is harmonic.
    pub quadratic: [[f64; 3]; 3],
}

impl HarmonicPoly {
    pub fn new(dim: u32, constant: f64, cracktip: f64, linear: [f64; 3], quadratic: [[f64; 3]; 3]) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Input(format!("dimension must be 2 or 3, got {dim}")));
        }
        let q = &quadratic;
        for i in 0..3 {
            for j in 0..3 {
                if q[i][j] != q[j][i] {
                    return Err(Error::Input("quadratic part must be symmetric".into()));
                }
            }
        }
        let trace = q[0][0] + q[1][1] + q[2][2];
        let scale = q.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if trace.abs() > 1e-14 * scale.max(1.0) {
            return Err(Error::Input(format!("quadratic part must be traceless, trace {trace}")));
        }
        if dim == 2 && (linear[2] != 0.0 || (0..3).any(|k| q[2][k] != 0.0)) {
            return Err(Error::Input("a planar polynomial cannot depend on z".into()));
        }
        Ok(Self { dim, constant, cracktip, linear, quadratic })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AnalyticField {
    /// `sqrt(2 rho / pi) sin(theta / 2)` in the plane.
    Cracktip2D,
    /// The same function of `(x, y)`, constant in `z`.
    CracktipTimesR,
    Constant(f64),
    Custom(HarmonicPoly),
}

const TIP: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)

/// Polar angle with the branch cut on the crack.
pub(crate) fn crack_angle(p: &[f64; 3], side: CrackSide) -> Result<f64> {
    let on_crack = p[1] == 0.0 && p[0] <= 0.0;
    if !on_crack {
        return Ok(p[1].atan2(p[0]));
    }
    match side {
        CrackSide::Upper => Ok(PI),
        CrackSide::Lower => Ok(-PI),
        CrackSide::Off => Err(Error::Branch { point: *p }),
    }
}

/// Value and planar gradient of `sqrt(2 rho / pi) sin(theta / 2)`.
fn cracktip(p: &[f64; 3], side: CrackSide, need_grad: bool) -> Result<(f64, [f64; 3])> {
    let rho = p[0].hypot(p[1]);
    if rho == 0.0 {
        if need_grad {
            return Err(Error::Branch { point: *p });
        }
        return Ok((0.0, [0.0; 3]));
    }
    let theta = crack_angle(p, side)?;
    let (s, c) = (0.5 * theta).sin_cos();
    let value = TIP * rho.sqrt() * s;
    // grad = c0 / (2 sqrt(rho)) (-sin(theta/2), cos(theta/2))
    let k = TIP / (2.0 * rho.sqrt());
    Ok((value, [-k * s, k * c, 0.0]))
}

impl AnalyticField {
    /// Ambient dimension, or `None` for constants which live in any.
    pub fn dim(&self) -> Option<u32> {
        match self {
            AnalyticField::Cracktip2D => Some(2),
            AnalyticField::CracktipTimesR => Some(3),
            AnalyticField::Constant(_) => None,
            AnalyticField::Custom(h) => Some(h.dim),
        }
    }

    fn has_tip(&self) -> bool {
        match self {
            AnalyticField::Cracktip2D | AnalyticField::CracktipTimesR => true,
            AnalyticField::Constant(_) => false,
            AnalyticField::Custom(h) => h.cracktip != 0.0,
        }
    }

    fn evaluate(&self, p: &[f64; 3], side: CrackSide, need_grad: bool) -> Result<(f64, [f64; 3])> {
        let p = match self.dim() {
            Some(2) => [p[0], p[1], 0.0],
            _ => *p,
        };
        match self {
            AnalyticField::Cracktip2D | AnalyticField::CracktipTimesR => cracktip(&p, side, need_grad),
            AnalyticField::Constant(c) => Ok((*c, [0.0; 3])),
            AnalyticField::Custom(h) => {
                let (mut v, mut g) = if self.has_tip() {
                    let (v, g) = cracktip(&p, side, need_grad)?;
                    (h.cracktip * v, g.map(|x| h.cracktip * x))
                } else {
                    (0.0, [0.0; 3])
                };
                v += h.constant;
                for i in 0..3 {
                    v += h.linear[i] * p[i];
                    g[i] += h.linear[i];
                    for j in 0..3 {
                        v += h.quadratic[i][j] * p[i] * p[j];
                        g[i] += 2.0 * h.quadratic[i][j] * p[j];
                    }
                }
                Ok((v, g))
            }
        }
    }

    pub fn value(&self, p: &[f64; 3], side: CrackSide) -> Result<f64> {
        self.evaluate(p, side, false).map(|r| r.0)
    }

    /// Value and gradient. Points on the crack need a side; the crack edge
    /// has no gradient.
    pub fn eval(&self, p: &[f64; 3], side: CrackSide) -> Result<(f64, [f64; 3])> {
        self.evaluate(p, side, true)
    }

    pub fn grad_norm_sq(&self, p: &[f64; 3]) -> Result<f64> {
        let (_, g) = self.eval(p, CrackSide::Off)?;
        Ok(g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
    }

    /// `x -> u(rho x) / sqrt(rho)`. The crack is a cone, so it is unchanged.
    pub fn rescale(&self, rho: f64) -> Result<AnalyticField> {
        if !(rho > 0.0) {
            return Err(Error::Range(format!("rescaling factor must be positive, got {rho}")));
        }
        let s = rho.sqrt();
        Ok(match self {
            AnalyticField::Cracktip2D | AnalyticField::CracktipTimesR => *self,
            AnalyticField::Constant(c) => AnalyticField::Constant(c / s),
            AnalyticField::Custom(h) => AnalyticField::Custom(HarmonicPoly {
                constant: h.constant / s,
                linear: h.linear.map(|v| v * s),
                quadratic: h.quadratic.map(|row| row.map(|v| v * rho * s)),
                ..*h
            }),
        })
    }

    /// Nodal interpolant on a mesh, using the mesh's crack sides.
    pub fn sample_on(&self, mesh: &SlitMesh) -> Result<ScalarField> {
        let sides = mesh.sides();
        let values = mesh
            .vertices()
            .iter()
            .zip(&sides)
            .map(|(p, &s)| self.value(p, s))
            .collect::<Result<Vec<f64>>>()?;
        ScalarField::new(mesh, values, FieldCondition::Free)
    }
}

/// Rescaling of any field; see [`AnalyticField::rescale`].
pub fn rescale_field(field: &AnalyticField, rho: f64) -> Result<AnalyticField> {
    field.rescale(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cracktip_values() {
        let f = AnalyticField::Cracktip2D;
        let v = f.value(&[-1.0, 0.0, 0.0], CrackSide::Upper).unwrap();
        assert!((v - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert_eq!(f.value(&[0.7, 0.0, 0.0], CrackSide::Off).unwrap(), 0.0);
        assert!(matches!(f.value(&[-0.5, 0.0, 0.0], CrackSide::Off), Err(Error::Branch { .. })));
        assert_eq!(f.value(&[0.0, 0.0, 0.0], CrackSide::Off).unwrap(), 0.0);
        assert!(f.eval(&[0.0, 0.0, 0.0], CrackSide::Off).is_err());
        let z = AnalyticField::CracktipTimesR.value(&[-1.0, 0.0, 5.0], CrackSide::Upper).unwrap();
        assert_eq!(z, v);
    }

    #[test]
    fn cracktip_gradient_norm() {
        for &(r, t) in &[(0.3, 0.1), (2.0, -2.9), (0.01, 3.0), (1.0, 0.0)] {
            let p = [r * f64::cos(t), r * f64::sin(t), 0.0];
            let g2 = AnalyticField::Cracktip2D.grad_norm_sq(&p).unwrap();
            assert!((g2 - 1.0 / (2.0 * PI * r)).abs() < 1e-13 / r);
        }
    }

    #[test]
    fn traceless_check() {
        let q = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(HarmonicPoly::new(3, 0.0, 0.0, [0.0; 3], q).is_err());
        let q = [[1.0, 0.5, 0.0], [0.5, -1.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(HarmonicPoly::new(2, 0.0, 1.0, [0.3, 0.0, 0.0], q).is_ok());
        assert!(HarmonicPoly::new(2, 0.0, 1.0, [0.3, 0.0, 1.0], q).is_err());
    }

    #[test]
    fn rescaling() {
        assert_eq!(AnalyticField::CracktipTimesR.rescale(7.0).unwrap(), AnalyticField::CracktipTimesR);
        let q = [[0.2, 0.1, 0.0], [0.1, -0.2, 0.0], [0.0, 0.0, 0.0]];
        let h = AnalyticField::Custom(HarmonicPoly::new(2, 0.4, 1.0, [0.3, -0.1, 0.0], q).unwrap());
        assert_eq!(h.rescale(1.0).unwrap(), h);
        let rho = 2.5;
        let hr = h.rescale(rho).unwrap();
        let p = [0.3, 0.2, 0.0];
        let lhs = hr.value(&p, CrackSide::Off).unwrap();
        let rhs = h.value(&[rho * p[0], rho * p[1], 0.0], CrackSide::Off).unwrap() / rho.sqrt();
        assert!((lhs - rhs).abs() < 1e-14);
        assert!(h.rescale(0.0).is_err());
    }
}
