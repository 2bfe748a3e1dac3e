//! Eigenvalue experiments on cracked spheres and circles.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_mass, remove_component_means, ScalarField, SparseSymOperator};
use crate::eigensolve::{mesh_eigenpairs, EigenOptions, EigenResult};
use crate::error::{Error, Result};
use crate::exec::map_slice;
use crate::slitmesh::{build_slit_circle, build_slit_sphere, CrackSide, CrackSpec, Domain, MeshKind, SlitMesh};

/// Half-width of the aperture window around pi/2 used for the slope fit.
pub const LEGENDRE_WINDOW: f64 = 0.15;

/// Eigenvalues requested per solve: the zero modes plus a few positive ones.
fn eigen_count(mesh: &SlitMesh) -> usize {
    mesh.components() + 3
}

/// One solved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// Aperture beta, or a gap size, depending on the sweep.
    pub param: f64,
    pub label: String,
    pub level: u32,
    pub dofs: usize,
    pub h_max: f64,
    /// Smallest first positive eigenvalue over the components.
    pub lambda1: f64,
    pub lambda1_global: Option<f64>,
    pub lambda1_per_component: Vec<f64>,
    /// Largest residual among the computed pairs.
    pub residual: f64,
    pub seconds: f64,
}

/// Solves on a sphere mesh with the given crack; returns the record and the
/// raw eigen result.
pub fn solve_sphere_crack(
    crack: &CrackSpec,
    level: u32,
    grading: f64,
    opts: &EigenOptions,
) -> Result<(SweepRecord, EigenResult, SlitMesh)> {
    let start = Instant::now();
    let mesh = build_slit_sphere(crack, level, grading)?;
    let eig = mesh_eigenpairs(&mesh, eigen_count(&mesh), opts)?;
    let lambda1 = eig
        .lambda1_min()
        .ok_or_else(|| Error::Convergence { iterations: eig.iterations, residuals: eig.residuals.clone() })?;
    let record = SweepRecord {
        param: crack.total_length() / 2.0,
        label: String::new(),
        level,
        dofs: mesh.dof_count(),
        h_max: mesh.h_max(),
        lambda1,
        lambda1_global: eig.lambda1_global,
        lambda1_per_component: eig.lambda1_per_component.clone(),
        residual: eig.residuals.iter().copied().fold(0.0, f64::max),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((record, eig, mesh))
}

/// First positive eigenvalue of the sphere minus the arc `S_beta`. For
/// `beta = pi` the complement has two components and the smaller of their
/// first eigenvalues is returned.
pub fn lambda1_sphere_minus_arc(beta: f64, level: u32, grading: f64, opts: &EigenOptions) -> Result<f64> {
    Ok(sweep_record(beta, level, grading, opts)?.lambda1)
}

fn sweep_record(beta: f64, level: u32, grading: f64, opts: &EigenOptions) -> Result<SweepRecord> {
    let crack = CrackSpec::sphere_arc(beta)?;
    let (mut record, _, _) = solve_sphere_crack(&crack, level, grading, opts)?;
    record.param = beta;
    record.label = format!("beta={beta:.6}");
    Ok(record)
}

/// Records for each aperture, sorted by aperture. Points run as independent
/// tasks.
pub fn sweep_betas(betas: &[f64], level: u32, grading: f64, opts: &EigenOptions) -> Result<Vec<SweepRecord>> {
    let mut sorted = betas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let records: Vec<Result<SweepRecord>> = map_slice(opts.exec, &sorted, |&b| sweep_record(b, level, grading, opts));
    records.into_iter().collect()
}

/// Three-level extrapolation `v3 + (v3 - v2) / (2^p - 1)` with the order
/// `p = log2((v1 - v2) / (v2 - v3))` fitted from the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Richardson {
    pub value: f64,
    /// `None` when the differences do not shrink geometrically, in which case
    /// `value` is the finest level's value.
    pub order: Option<f64>,
}

pub fn richardson(v: [f64; 3]) -> Richardson {
    let (d1, d2) = (v[0] - v[1], v[1] - v[2]);
    let ratio = d1 / d2;
    if !(ratio.is_finite() && ratio > 1.0) {
        return Richardson { value: v[2], order: None };
    }
    let p = ratio.log2();
    Richardson { value: v[2] + (v[2] - v[1]) / (2f64.powf(p) - 1.0), order: Some(p) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub levels: Vec<u32>,
    pub values: Vec<f64>,
    pub richardson: Richardson,
    /// Whether the discrete values approach from above.
    pub from_above: bool,
}

/// First eigenvalue of `S^2 \ S_beta` at three consecutive levels, with
/// Richardson extrapolation.
pub fn lambda1_extrapolated(beta: f64, finest: u32, grading: f64, opts: &EigenOptions) -> Result<Extrapolation> {
    if finest < 2 {
        return Err(Error::Input("extrapolation needs a finest level of at least 2".into()));
    }
    let levels = vec![finest - 2, finest - 1, finest];
    let values: Vec<f64> =
        levels.iter().map(|&l| lambda1_sphere_minus_arc(beta, l, grading, opts)).collect::<Result<_>>()?;
    let r = richardson([values[0], values[1], values[2]]);
    Ok(Extrapolation { from_above: values[2] > r.value, levels, values, richardson: r })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Input(format!("need matching samples, got {} and {}", x.len(), y.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Input("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Ok(LineFit { slope, intercept, rms_residual: rms })
}

fn check_window(betas: &[f64]) -> Result<()> {
    if betas.len() < 3 {
        return Err(Error::Input(format!("need at least 3 apertures, got {}", betas.len())));
    }
    if let Some(b) = betas.iter().find(|b| (**b - FRAC_PI_2).abs() > LEGENDRE_WINDOW + 1e-12) {
        return Err(Error::Range(format!("aperture {b} is outside pi/2 +- {LEGENDRE_WINDOW}")));
    }
    Ok(())
}

/// Fit of `lambda1` against `cos beta` for given data.
pub fn legendre_fit(betas: &[f64], lambdas: &[f64]) -> Result<LineFit> {
    check_window(betas)?;
    let x: Vec<f64> = betas.iter().map(|b| b.cos()).collect();
    fit_line(&x, lambdas)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreSlope {
    pub fit: LineFit,
    pub records: Vec<SweepRecord>,
}

/// Solves at each aperture near pi/2 and fits `lambda1 = intercept + slope
/// cos beta`.
pub fn legendre_slope(betas: &[f64], level: u32, grading: f64, opts: &EigenOptions) -> Result<LegendreSlope> {
    check_window(betas)?;
    let records = sweep_betas(betas, level, grading, opts)?;
    let b: Vec<f64> = records.iter().map(|r| r.param).collect();
    let l: Vec<f64> = records.iter().map(|r| r.lambda1).collect();
    Ok(LegendreSlope { fit: legendre_fit(&b, &l)?, records })
}

/// The half-equator `{|phi| <= pi/2}` with the given open gaps removed.
/// Pieces that shrink to single points are dropped, since a point does not
/// change the spectrum.
pub fn half_equator_minus_gaps(gaps: &[(f64, f64)]) -> Result<CrackSpec> {
    let mut gaps = gaps.to_vec();
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(a, b) in &gaps {
        if !(a < b && a >= -FRAC_PI_2 - 1e-12 && b <= FRAC_PI_2 + 1e-12) {
            return Err(Error::InvalidCrack(format!("gap ({a}, {b}) is not a sub-arc of the half-equator")));
        }
    }
    let mut arcs = Vec::new();
    let mut cursor = -FRAC_PI_2;
    for &(a, b) in &gaps {
        if a < cursor - 1e-12 {
            return Err(Error::InvalidCrack("gaps overlap".into()));
        }
        if a > cursor {
            arcs.push((cursor, a));
        }
        cursor = b;
    }
    if cursor < FRAC_PI_2 {
        arcs.push((cursor, FRAC_PI_2));
    }
    arcs.retain(|&(a, b)| b - a > 1e-12);
    if arcs.is_empty() {
        return Ok(CrackSpec::none(Domain::Sphere2));
    }
    CrackSpec::sphere(&arcs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityRecord {
    pub gaps: Vec<(f64, f64)>,
    pub fine: SweepRecord,
    pub coarse_lambda1: f64,
    /// Three times the two-level eigenvalue change.
    pub margin: f64,
    /// `lambda1 > 3/4 + margin`.
    pub strictly_above: bool,
}

/// For each gap set, the first eigenvalue of the sphere minus (half-equator
/// minus gaps) at `level` and `level - 1`, and whether it exceeds 3/4 by more
/// than the refinement margin.
pub fn rigidity_family(
    families: &[Vec<(f64, f64)>],
    level: u32,
    grading: f64,
    opts: &EigenOptions,
) -> Result<Vec<RigidityRecord>> {
    if level == 0 {
        return Err(Error::Input("rigidity needs level >= 1 for the refinement margin".into()));
    }
    let out: Vec<Result<RigidityRecord>> = map_slice(opts.exec, families, |gaps| {
        let crack = half_equator_minus_gaps(gaps)?;
        let (mut fine, _, _) = solve_sphere_crack(&crack, level, grading, opts)?;
        let (coarse, _, _) = solve_sphere_crack(&crack, level - 1, grading, opts)?;
        fine.param = gaps.iter().map(|g| g.1 - g.0).sum();
        fine.label = format!("gaps={gaps:?}");
        let margin = 3.0 * (fine.lambda1 - coarse.lambda1).abs();
        Ok(RigidityRecord {
            gaps: gaps.clone(),
            strictly_above: fine.lambda1 > 0.75 + margin,
            coarse_lambda1: coarse.lambda1,
            margin,
            fine,
        })
    });
    out.into_iter().collect()
}

fn is_half_equator(mesh: &SlitMesh) -> bool {
    let arcs = mesh.crack().arcs();
    mesh.kind() == MeshKind::Sphere
        && arcs.len() == 1
        && (arcs[0].0 + FRAC_PI_2).abs() < 1e-9
        && (arcs[0].1 - FRAC_PI_2).abs() < 1e-9
}

/// The crack-tip function `sqrt(r) sin(theta / 2)` restricted to the sphere,
/// in cylindrical coordinates about the crack's edge axis with the branch
/// cut on the crack.
pub fn cracktip_restriction(mesh: &SlitMesh) -> Result<ScalarField> {
    if !is_half_equator(mesh) {
        return Err(Error::Input("the crack-tip comparison needs the half-equator sphere mesh".into()));
    }
    let crack = mesh.crack().clone();
    ScalarField::interpolate(mesh, |p, side| {
        let q = crack.to_reference(p);
        // reference crack: y = 0, x <= 0, edge along z
        let r = q[0].hypot(q[1]);
        let theta = match side {
            CrackSide::Upper => PI,
            CrackSide::Lower => -PI,
            CrackSide::Off => q[1].atan2(q[0]),
        };
        r.sqrt() * (0.5 * theta).sin()
    })
}

/// `|<u, f>_M| / (|u|_M |f|_M)` after removing means, with `f` the crack-tip
/// restriction.
pub fn compare_to_cracktip(mesh: &SlitMesh, mass: &SparseSymOperator, eigvec: &ScalarField) -> Result<f64> {
    let f = cracktip_restriction(mesh)?;
    if !eigvec.belongs_to(mesh) {
        return Err(Error::Input("eigenvector was computed on a different mesh".into()));
    }
    let u = remove_component_means(mesh, mass, eigvec.values());
    let f = remove_component_means(mesh, mass, f.values());
    let nu = mass.quad_form(&u).sqrt();
    let nf = mass.quad_form(&f).sqrt();
    if !(nu > 0.0 && nf > 0.0) {
        return Err(Error::Input("cannot compare a constant field".into()));
    }
    Ok(mass.bilinear(&u, &f).abs() / (nu * nf))
}

/// Convenience: solve on the half-equator mesh and compare the first
/// positive eigenvector to the crack-tip restriction.
pub fn cracktip_similarity(level: u32, grading: f64, opts: &EigenOptions) -> Result<f64> {
    let crack = CrackSpec::sphere_arc(FRAC_PI_2)?;
    let (_, eig, mesh) = solve_sphere_crack(&crack, level, grading, opts)?;
    let m = assemble_mass(&mesh, false, opts.exec)?;
    let v = ScalarField::new(&mesh, eig.eigenvectors[eig.zero_modes].clone(), crate::assembly::FieldCondition::Neumann)?;
    compare_to_cracktip(&mesh, &m, &v)
}

/// `(pi / length)^2`, the first Neumann eigenvalue of an interval.
pub fn circle_arc_lambda1(length: f64) -> Result<f64> {
    if !(length > 0.0 && length <= TAU + 1e-12) {
        return Err(Error::Range(format!("arc length {length} outside (0, 2 pi]")));
    }
    Ok((PI / length).powi(2))
}

/// First positive eigenvalue of the circle minus the given cuts, by P1 FEM
/// on a segment graph.
pub fn lambda1_circle_minus(cuts: &[(f64, f64)], segments: usize, opts: &EigenOptions) -> Result<f64> {
    let mesh = build_slit_circle(&CrackSpec::circle(cuts)?, segments)?;
    let eig = mesh_eigenpairs(&mesh, eigen_count(&mesh), opts)?;
    eig.lambda1_min()
        .ok_or_else(|| Error::Convergence { iterations: eig.iterations, residuals: eig.residuals })
}
