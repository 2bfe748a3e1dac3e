//! Neumann-harmonic fields on the slit unit disk and their energy profiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::crack_angle;
use super::{check_radii, EnergyProfile, ExponentParams};
use crate::assembly::{assemble_stiffness, ball_energy, boundary_flux, FieldCondition, ScalarField};
use crate::eigensolve::Factor;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::slitmesh::{CrackSide, MeshKind, SlitMesh};

/// Relative residual required of the reduced Dirichlet system.
const SOLVE_TOL: f64 = 1e-10;
/// Monotonicity slack as a multiple of the two-level difference.
const PROFILE_SLACK: f64 = 5.0;
/// Boundary-inequality slack as a multiple of the two-level difference.
const BOUNDARY_SLACK: f64 = 2.0;

/// Both sides of the boundary inequality at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    pub radius: f64,
    /// Weighted energy in the ball.
    pub lhs: f64,
    /// Boundary terms on the sphere minus the crack.
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Smooth boundary data on the unit circle cut at angle `pi`: a Fourier
/// series plus half-integer modes that jump across the cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierData {
    pub constant: f64,
    /// `cos(k theta)`, `sin(k theta)` for `k = 1, 2, ...`.
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    /// `sin((k - 1/2) theta)` for `k = 1, 2, ...`.
    pub half: Vec<f64>,
}

impl FourierData {
    /// Coefficients uniform in `[-1, 1]` divided by `k^2`.
    pub fn random(seed: u64, modes: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |k: usize| (2.0 * rng.random::<f64>() - 1.0) / (k * k) as f64;
        let constant = draw(1);
        let cos = (1..=modes).map(&mut draw).collect();
        let sin = (1..=modes).map(&mut draw).collect();
        let half = (1..=modes).map(&mut draw).collect();
        Self { constant, cos, sin, half }
    }

    pub fn value(&self, p: &[f64; 3], side: CrackSide) -> Result<f64> {
        let t = crack_angle(p, side)?;
        let mut v = self.constant;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kt = (k + 1) as f64 * t;
            v += a * kt.cos() + b * kt.sin();
        }
        for (k, c) in self.half.iter().enumerate() {
            v += c * ((k as f64 + 0.5) * t).sin();
        }
        Ok(v)
    }
}

fn require_disk(mesh: &SlitMesh) -> Result<()> {
    if mesh.kind() != MeshKind::Disk {
        return Err(Error::Input(format!("expected a slit disk mesh, got {:?}", mesh.kind())));
    }
    Ok(())
}

fn outer_radius(mesh: &SlitMesh) -> f64 {
    mesh.vertices().iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Harmonic extension of `data` from the outer circle, with natural
/// (Neumann) conditions on both sides of the slit.
pub fn solve_slit_disk_neumann<F>(mesh: &SlitMesh, data: F, exec: Execution) -> Result<ScalarField>
where
    F: Fn(&[f64; 3], CrackSide) -> Result<f64>,
{
    require_disk(mesh)?;
    let outer = outer_radius(mesh) - 1e-9;
    let sides = mesh.sides();
    let n = mesh.dof_count();
    let mut u = vec![0.0; n];
    let mut interior = Vec::new();
    let mut boundary = 0;
    for (i, p) in mesh.vertices().iter().enumerate().take(n) {
        if p[0].hypot(p[1]) >= outer {
            u[i] = data(p, sides[i])?;
            if !u[i].is_finite() {
                return Err(Error::Input(format!("boundary data is not finite at {p:?}")));
            }
            boundary += 1;
        } else {
            interior.push(i);
        }
    }
    if boundary == 0 {
        return Err(Error::Input("no Dirichlet vertices: the Neumann problem is singular".into()));
    }
    let first = mesh.vertices().iter().position(|p| p[0].hypot(p[1]) >= outer).map(|i| u[i]);
    let constant = first.filter(|c| (0..n).all(|i| interior.binary_search(&i).is_ok() || u[i] == *c));
    if let Some(c) = constant {
        // the extension of constant data is that constant
        return ScalarField::new(mesh, vec![c; n], FieldCondition::Neumann);
    }
    if !interior.is_empty() {
        let a = assemble_stiffness(mesh, exec)?;
        let au = a.apply(&u);
        let b: Vec<f64> = interior.iter().map(|&i| -au[i]).collect();
        let a_ii = a.restrict(&interior);
        let factor = Factor::new(&a_ii).map_err(|e| Error::Input(format!("reduced system is singular: {e}")))?;
        let mut x = factor.solve(&b);
        let target = SOLVE_TOL * norm(&b);
        let mut res = norm(&residual(&a_ii, &x, &b));
        for _ in 0..4 {
            if res <= target {
                break;
            }
            let dx = factor.solve(&residual(&a_ii, &x, &b));
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
            res = norm(&residual(&a_ii, &x, &b));
        }
        if !(res <= target) {
            return Err(Error::Factorization(format!("reduced system residual {res:e} above {target:e}")));
        }
        for (k, &i) in interior.iter().enumerate() {
            u[i] = x[k];
        }
    }
    ScalarField::new(mesh, u, FieldCondition::Neumann)
}

fn residual(a: &crate::assembly::SparseSymOperator, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.apply(x);
    b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
}

fn energies(mesh: &SlitMesh, field: &ScalarField, radii: &[f64], exec: Execution) -> Result<Vec<f64>> {
    radii.iter().map(|&r| ball_energy(mesh, field, r, exec)).collect()
}

fn inequality_gap(profile: &EnergyProfile) -> Vec<f64> {
    let alpha = profile.params.alpha;
    (0..profile.radii.len())
        .map(|i| profile.energy[i] - profile.radii[i] * profile.d_energy[i] / alpha)
        .collect()
}

/// Profile of a planar finite-element field. With a coarse solution of the
/// same problem the slack is five times the two-level difference, else only
/// rounding is allowed for.
pub fn energy_profile_fem(
    mesh: &SlitMesh,
    field: &ScalarField,
    params: ExponentParams,
    radii: &[f64],
    coarse: Option<(&SlitMesh, &ScalarField)>,
    exec: Execution,
) -> Result<EnergyProfile> {
    require_disk(mesh)?;
    if params.n != 2 {
        return Err(Error::Input(format!("finite-element profiles are planar, got N = {}", params.n)));
    }
    check_radii(radii)?;
    let h = mesh.h_max();
    let big = outer_radius(mesh);
    if let Some(r) = radii.iter().find(|&&r| !(r > 2.0 * h && r < big - 2.0 * h)) {
        return Err(Error::Range(format!("radius {r} is within two mesh sizes ({h:.3e}) of the origin or the boundary")));
    }
    let energy = energies(mesh, field, radii, exec)?;
    let floor = 1e-12 * energy.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let rough = EnergyProfile::build(params, radii.to_vec(), energy.clone(), vec![floor; radii.len()], vec![floor; radii.len()]);
    let Some((cmesh, cfield)) = coarse else {
        return Ok(rough);
    };
    require_disk(cmesh)?;
    let cenergy = energies(cmesh, cfield, radii, exec)?;
    let cprof = EnergyProfile::build(params, radii.to_vec(), cenergy, vec![0.0; radii.len()], vec![0.0; radii.len()]);
    let slack = rough.phi.iter().zip(&cprof.phi).map(|(f, c)| floor + PROFILE_SLACK * (f - c).abs()).collect();
    let ineq = inequality_gap(&rough)
        .iter()
        .zip(inequality_gap(&cprof))
        .map(|(f, c)| floor + PROFILE_SLACK * (f - c).abs())
        .collect();
    Ok(EnergyProfile::build(params, radii.to_vec(), energy, slack, ineq))
}

fn boundary_sides(mesh: &SlitMesh, field: &ScalarField, n: u32, r: f64, exec: Execution) -> Result<(f64, f64)> {
    let lhs = ball_energy(mesh, field, r, exec)?;
    let b = boundary_flux(mesh, field, r)?;
    let nn = n as f64;
    let rhs = r.powf(2.0 - nn) * b.flux() + (nn - 2.0) / (2.0 * r.powf(nn - 1.0)) * b.l2();
    Ok((lhs, rhs))
}

/// Bulk energy in `B_r` against the boundary terms on the circle minus the
/// slit. The slack is twice the two-level change of `lhs - rhs`.
pub fn boundary_inequality_check(
    mesh: &SlitMesh,
    field: &ScalarField,
    params: ExponentParams,
    r: f64,
    coarse: Option<(&SlitMesh, &ScalarField)>,
    exec: Execution,
) -> Result<BoundaryCheck> {
    require_disk(mesh)?;
    if params.n != 2 {
        return Err(Error::Input(format!("finite-element boundary checks are planar, got N = {}", params.n)));
    }
    let (lhs, rhs) = boundary_sides(mesh, field, params.n, r, exec)?;
    let floor = 1e-12 * lhs.abs().max(rhs.abs());
    let slack = match coarse {
        Some((cmesh, cfield)) => {
            require_disk(cmesh)?;
            let (cl, cr) = boundary_sides(cmesh, cfield, params.n, r, exec)?;
            floor + BOUNDARY_SLACK * ((lhs - rhs) - (cl - cr)).abs()
        }
        None => floor,
    };
    Ok(BoundaryCheck { radius: r, lhs, rhs, slack, pass: lhs <= rhs + slack })
}
