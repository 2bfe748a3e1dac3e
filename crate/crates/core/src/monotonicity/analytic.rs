//! Energies of closed-form fields by nested adaptive quadrature.
//!
//! Planar balls use polar coordinates `(rho, theta)`, spatial balls
//! spherical coordinates with polar axis `z`. The radius is written as `s^2`
//! so the square-root behaviour at the crack edge becomes smooth, and the
//! angle `theta` runs over `(-pi, pi)` with the crack at its ends.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::fem::BoundaryCheck;
use super::field::AnalyticField;
use super::{check_radii, EnergyProfile, ExponentParams};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::quadrature::integrate;
use crate::slitmesh::CrackSide;

/// Requested accuracy of `E(r)`.
const ENERGY_TOL: f64 = 1e-9;
/// Relative accuracy of the inner integrals.
const INNER_REL: f64 = 1e-11;
/// Slack on `phi` for closed-form profiles.
const PHI_SLACK: f64 = 1e-6;

/// Adaptive integration of a fallible integrand. The first error raised by
/// `f` is returned in place of the quadrature's own failure.
fn nested<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    let failure: Cell<Option<Error>> = Cell::new(None);
    let out = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                let prev = failure.take();
                failure.set(Some(prev.unwrap_or(e)));
                f64::NAN
            }
        },
        a,
        b,
        abs_tol,
        rel_tol,
    );
    match failure.take() {
        Some(e) => Err(e),
        None => out,
    }
}

fn polar(rho: f64, theta: f64, z: f64) -> ([f64; 3], CrackSide) {
    let side = if theta > 0.0 { CrackSide::Upper } else { CrackSide::Lower };
    ([rho * theta.cos(), rho * theta.sin(), z], side)
}

fn grad_sq(field: &AnalyticField, p: &[f64; 3], side: CrackSide) -> Result<f64> {
    let (_, g) = field.eval(p, side)?;
    Ok(g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
}

fn check_dimension(field: &AnalyticField, n: u32) -> Result<()> {
    if !(2..=3).contains(&n) {
        return Err(Error::Input(format!("closed-form energies are available for N = 2, 3, got {n}")));
    }
    if field.dim().is_some_and(|d| d > n) {
        return Err(Error::Input(format!("a {}-dimensional field cannot be integrated in dimension {n}", field.dim().unwrap_or(0))));
    }
    Ok(())
}

/// `int_{B_r} |grad u|^2 |x|^(2-N) dx`, or without the weight when
/// `weighted` is false.
fn ball_integral(field: &AnalyticField, n: u32, r: f64, weighted: bool) -> Result<f64> {
    check_dimension(field, n)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Range(format!("radius must be positive, got {r}")));
    }
    if let AnalyticField::Constant(_) = field {
        return Ok(0.0);
    }
    let inner_abs = 1e-3 * ENERGY_TOL;
    let outer = |s: f64| -> Result<f64> {
        let rho = s * s;
        let jac = 2.0 * s;
        if n == 2 {
            // |grad u|^2 rho d theta; the weight is 1
            let ring = nested(
                |t| {
                    let (p, side) = polar(rho, t, 0.0);
                    grad_sq(field, &p, side)
                },
                -PI,
                PI,
                inner_abs,
                INNER_REL,
            )?;
            return Ok(ring * rho * jac);
        }
        // spherical shell of radius rho: rho^2 sin(psi) dpsi dtheta
        let shell = nested(
            |psi: f64| {
                let (sp, cp) = psi.sin_cos();
                let line = nested(
                    |t| {
                        let (p, side) = polar(rho * sp, t, rho * cp);
                        grad_sq(field, &p, side)
                    },
                    -PI,
                    PI,
                    inner_abs,
                    INNER_REL,
                )?;
                Ok(line * sp)
            },
            0.0,
            PI,
            inner_abs,
            INNER_REL,
        )?;
        let weight = if weighted { 1.0 / rho } else { 1.0 };
        Ok(shell * rho * rho * weight * jac)
    };
    nested(outer, 0.0, r.sqrt(), ENERGY_TOL, 0.1 * ENERGY_TOL)
}

/// Weighted energy `E(r) = int_{B_r} |grad u|^2 |x|^(2-N)`.
pub fn energy_analytic(field: &AnalyticField, n: u32, r: f64) -> Result<f64> {
    ball_integral(field, n, r, true)
}

/// `int_{B_r} |grad u|^2` in three dimensions.
pub fn unweighted_energy(field: &AnalyticField, r: f64) -> Result<f64> {
    ball_integral(field, 3, r, false)
}

pub fn energy_profile_analytic(
    field: &AnalyticField,
    params: ExponentParams,
    radii: &[f64],
    exec: Execution,
) -> Result<EnergyProfile> {
    check_radii(radii)?;
    check_dimension(field, params.n)?;
    let energy = map_slice(exec, radii, |&r| energy_analytic(field, params.n, r)).into_iter().collect::<Result<Vec<_>>>()?;
    let slack = vec![PHI_SLACK; radii.len()];
    // E - r E'/alpha = -(r^(alpha+1)/alpha) phi', so the phi slack carries over
    let ineq = radii.iter().map(|r| PHI_SLACK * r.powf(params.alpha)).collect();
    Ok(EnergyProfile::build(params, radii.to_vec(), energy, slack, ineq))
}

/// Unweighted energy against the sphere-area bound `4 pi R^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBound {
    pub radius: f64,
    pub energy: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

pub fn unweighted_energy_bound_check(field: &AnalyticField, radii: &[f64]) -> Result<Vec<EnergyBound>> {
    radii
        .iter()
        .map(|&r| {
            let energy = unweighted_energy(field, r)?;
            let bound = 4.0 * PI * r * r;
            Ok(EnergyBound { radius: r, energy, bound, ratio: energy / bound, pass: energy <= bound })
        })
        .collect()
}

/// Integral over the sphere (or circle) of radius `r` of `f(u, du/dnu)`.
fn sphere_integral<F: Fn(f64, f64) -> f64>(field: &AnalyticField, n: u32, r: f64, f: F) -> Result<f64> {
    let at = |p: [f64; 3], side: CrackSide| -> Result<f64> {
        let (u, g) = field.eval(&p, side)?;
        let dn = (g[0] * p[0] + g[1] * p[1] + g[2] * p[2]) / r;
        Ok(f(u, dn))
    };
    let tol = 1e-3 * ENERGY_TOL;
    if n == 2 {
        let circle = nested(|t| { let (p, s) = polar(r, t, 0.0); at(p, s) }, -PI, PI, tol, INNER_REL)?;
        return Ok(circle * r);
    }
    let sphere = nested(
        |psi: f64| {
            let (sp, cp) = psi.sin_cos();
            let line = nested(|t| { let (p, s) = polar(r * sp, t, r * cp); at(p, s) }, -PI, PI, tol, INNER_REL)?;
            Ok(line * sp)
        },
        0.0,
        PI,
        tol,
        INNER_REL,
    )?;
    Ok(sphere * r * r)
}

/// Both sides of the boundary inequality for a closed-form field. The
/// sphere minus a conical crack through the origin is connected, so there is
/// one mean.
pub fn boundary_inequality_analytic(field: &AnalyticField, params: ExponentParams, r: f64) -> Result<BoundaryCheck> {
    check_dimension(field, params.n)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Range(format!("radius must be positive, got {r}")));
    }
    let n = params.n;
    let lhs = energy_analytic(field, n, r)?;
    let area = if n == 2 { 2.0 * PI * r } else { 4.0 * PI * r * r };
    let mean = sphere_integral(field, n, r, |u, _| u)? / area;
    let flux = sphere_integral(field, n, r, |u, dn| (u - mean) * dn)?;
    let l2 = sphere_integral(field, n, r, |u, _| (u - mean) * (u - mean))?;
    let nn = n as f64;
    let rhs = r.powf(2.0 - nn) * flux + (nn - 2.0) / (2.0 * r.powf(nn - 1.0)) * l2;
    let slack = 1e-7 * lhs.abs().max(1.0);
    Ok(BoundaryCheck { radius: r, lhs, rhs, slack, pass: lhs <= rhs + slack })
}
