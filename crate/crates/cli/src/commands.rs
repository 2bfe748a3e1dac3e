use std::collections::BTreeMap;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI, TAU};
use std::path::Path;
use std::time::Instant;

use serde_json::json;
use slitspec::assembly::{assemble_mass, assemble_stiffness, ball_energy, FieldCondition, ScalarField};
use slitspec::eigensolve::{mesh_eigenpairs, rayleigh_quotient, EigenOptions, DEFAULT_SEED};
use slitspec::io::{eigenvalues_csv, profile_csv, read_csv, sweep_csv, write_atomic, MeshStats, RunManifest};
use slitspec::monotonicity::{
    boundary_inequality_check, energy_profile_analytic, energy_profile_fem, log_radii, log_radii_per_decade,
    solve_slit_disk_neumann, AnalyticField, ExponentParams, FourierData, HarmonicPoly,
};
use slitspec::slitmesh::{build_slit_disk, build_slit_sphere, CrackSide, CrackSpec};
use slitspec::spectra::{
    circle_arc_lambda1, compare_to_cracktip, cracktip_restriction, lambda1_circle_minus, lambda1_sphere_minus_arc,
    legendre_slope, rigidity_family, sweep_betas,
};
use slitspec::{Error, Execution, Result};

use crate::args::{
    CircleArgs, Cli, Command, ConvergenceArgs, DataKind, EigSphereArgs, LegendreArgs, Method, MonotonicityArgs,
    ReplayArgs, SweepArgs, Target,
};

/// Result of one command: the manifest, the CSV body and report lines.
pub struct Outcome {
    pub manifest: RunManifest,
    pub csv: Option<String>,
    pub lines: Vec<String>,
}

impl Outcome {
    fn new(manifest: RunManifest) -> Self {
        Self { manifest, csv: None, lines: Vec::new() }
    }

    fn say(&mut self, line: String) {
        self.lines.push(line);
    }

    fn verdict(&mut self, name: &str, pass: bool) {
        self.lines.push(format!("{} {name}", if pass { "PASS" } else { "FAIL" }));
        self.manifest.verdicts.insert(name.to_string(), pass);
    }

    pub fn pass(&self) -> bool {
        self.manifest.verdicts.values().all(|&v| v)
    }
}

/// Seed from the flag, then `SLITSPEC_SEED`, then the default.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("SLITSPEC_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Error::Input(format!("SLITSPEC_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Arguments worth recording for a rerun: everything except the output
/// location and the error format.
pub fn recorded_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") || a == "--json-errors" {
            continue;
        }
        out.push(a.clone());
    }
    out
}

struct Setup {
    opts: EigenOptions,
    exec: Execution,
}

fn setup(cli: &Cli) -> Result<Setup> {
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        return Err(Error::Input(format!("tolerance {} outside (0, 1)", cli.tol)));
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let opts = EigenOptions { tol: cli.tol, seed: resolve_seed(cli.seed)?, exec, ..EigenOptions::default() };
    Ok(Setup { opts, exec })
}

fn manifest(cli: &Cli, s: &Setup, command: &str, args: Vec<String>, params: serde_json::Value) -> RunManifest {
    let mut m = RunManifest::new(command, args, params, s.opts.seed);
    m.tolerances.insert("eigen_residual".into(), cli.tol);
    m
}

pub fn run(cli: &Cli, args: Vec<String>) -> Result<Outcome> {
    let start = Instant::now();
    let s = setup(cli)?;
    let mut out = match &cli.command {
        Command::EigSphere(a) => eig_sphere(cli, &s, a, args),
        Command::Sweep(a) => sweep(cli, &s, a, args),
        Command::Legendre(a) => legendre(cli, &s, a, args),
        Command::Monotonicity(a) => monotonicity(cli, &s, a, args),
        Command::Convergence(a) => convergence(cli, &s, a, args),
        Command::Circle(a) => circle(cli, &s, a, args),
        Command::Replay(a) => replay(a),
    }?;
    out.manifest.seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Writes `PREFIX.csv` and `PREFIX.manifest.json`.
pub fn write_outputs(prefix: &Path, out: &mut Outcome) -> Result<()> {
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let stem = prefix
        .file_name()
        .ok_or_else(|| Error::Input(format!("output prefix {} has no file name", prefix.display())))?
        .to_string_lossy()
        .to_string();
    if let Some(csv) = &out.csv {
        let name = format!("{stem}.csv");
        write_atomic(&prefix.with_file_name(&name), csv.as_bytes())?;
        out.manifest.outputs = vec![name];
    }
    out.manifest.write(&prefix.with_file_name(format!("{stem}.manifest.json")))
}

fn check_grading(m: &crate::args::MeshArgs) -> Result<()> {
    if !(m.grading >= 1.0 && m.grading.is_finite()) {
        return Err(Error::Input(format!("grading must be >= 1, got {}", m.grading)));
    }
    Ok(())
}

fn eig_sphere(cli: &Cli, s: &Setup, a: &EigSphereArgs, args: Vec<String>) -> Result<Outcome> {
    check_grading(&a.mesh)?;
    let half = (a.beta - FRAC_PI_2).abs() < 1e-6;
    let beta = if half { FRAC_PI_2 } else { a.beta };
    let params = json!({"beta": beta, "level": a.mesh.level, "grading": a.mesh.grading, "k": a.k});
    let mut out = Outcome::new(manifest(cli, s, "eig-sphere", args, params));
    let mesh = build_slit_sphere(&CrackSpec::sphere_arc(beta)?, a.mesh.level, a.mesh.grading)?;
    out.manifest.meshes.push(MeshStats::of(&mesh));
    let k = a.k.unwrap_or(mesh.components() + 3);
    let eig = mesh_eigenpairs(&mesh, k, &s.opts)?;
    let lambda1 = eig
        .lambda1_min()
        .ok_or_else(|| Error::Convergence { iterations: eig.iterations, residuals: eig.residuals.clone() })?;
    out.say(format!("lambda1 = {lambda1:.8}"));
    out.say(format!("zero_modes = {}", eig.zero_modes));
    out.say(format!("eigenvalues = {:?}", eig.eigenvalues));
    let within = eig.residuals.iter().zip(&eig.eigenvalues).all(|(r, l)| *r <= cli.tol * l.abs().max(1.0));
    out.verdict("residuals_within_tol", within);
    if half {
        let a_op = assemble_stiffness(&mesh, s.exec)?;
        let m_op = assemble_mass(&mesh, false, s.exec)?;
        let v = ScalarField::new(&mesh, eig.eigenvectors[eig.zero_modes].clone(), FieldCondition::Neumann)?;
        let similarity = compare_to_cracktip(&mesh, &m_op, &v)?;
        let rq = rayleigh_quotient(&a_op, &m_op, &mesh, &cracktip_restriction(&mesh)?)?;
        out.say(format!("cracktip_similarity = {similarity:.8}"));
        out.say(format!("cracktip_rayleigh = {rq:.6}"));
        out.verdict("cracktip_similarity", similarity >= 0.99);
        out.verdict("cracktip_rayleigh", (0.735..=0.765).contains(&rq));
    }
    out.csv = Some(eigenvalues_csv(&eig));
    Ok(out)
}

fn sweep(cli: &Cli, s: &Setup, a: &SweepArgs, args: Vec<String>) -> Result<Outcome> {
    check_grading(&a.mesh)?;
    if let Some(betas) = &a.betas {
        let params = json!({"betas": betas.0, "level": a.mesh.level, "grading": a.mesh.grading});
        let mut out = Outcome::new(manifest(cli, s, "sweep", args, params));
        let records = sweep_betas(&betas.0, a.mesh.level, a.mesh.grading, &s.opts)?;
        for r in &records {
            out.say(format!("beta = {:.6}  lambda1 = {:.8}  dofs = {}", r.param, r.lambda1, r.dofs));
        }
        if records.len() >= 2 {
            let decreasing = records.windows(2).all(|w| w[1].lambda1 < w[0].lambda1);
            out.verdict("lambda1_strictly_decreasing", decreasing);
        }
        out.csv = Some(sweep_csv(&records));
        return Ok(out);
    }
    let families: Vec<Vec<(f64, f64)>> = a.gaps.iter().map(|g| g.0.clone()).collect();
    let params = json!({"gaps": families, "level": a.mesh.level, "grading": a.mesh.grading});
    let mut out = Outcome::new(manifest(cli, s, "sweep", args, params));
    let records = rigidity_family(&families, a.mesh.level, a.mesh.grading, &s.opts)?;
    for (i, r) in records.iter().enumerate() {
        out.say(format!(
            "gaps = {:?}  lambda1 = {:.8}  coarse = {:.8}  margin = {:.2e}",
            r.gaps, r.fine.lambda1, r.coarse_lambda1, r.margin
        ));
        if !r.gaps.is_empty() {
            out.verdict(&format!("rigidity_{i}"), r.strictly_above);
        }
    }
    let fine: Vec<_> = records.into_iter().map(|r| r.fine).collect();
    out.csv = Some(sweep_csv(&fine));
    Ok(out)
}

fn legendre(cli: &Cli, s: &Setup, a: &LegendreArgs, args: Vec<String>) -> Result<Outcome> {
    check_grading(&a.mesh)?;
    if a.points < 3 {
        return Err(Error::Input(format!("need at least 3 apertures, got {}", a.points)));
    }
    let betas: Vec<f64> = (0..a.points)
        .map(|i| FRAC_PI_2 - a.window + 2.0 * a.window * i as f64 / (a.points - 1) as f64)
        .collect();
    let params = json!({"window": a.window, "points": a.points, "level": a.mesh.level, "grading": a.mesh.grading});
    let mut out = Outcome::new(manifest(cli, s, "legendre", args, params));
    let fit = legendre_slope(&betas, a.mesh.level, a.mesh.grading, &s.opts)?;
    out.say(format!("slope = {:.6} (2/pi = {:.6})", fit.fit.slope, FRAC_2_PI));
    out.say(format!("intercept = {:.6}", fit.fit.intercept));
    out.say(format!("rms_residual = {:.3e}", fit.fit.rms_residual));
    out.verdict("slope_within_10pct", (fit.fit.slope - FRAC_2_PI).abs() <= 0.1 * FRAC_2_PI);
    out.verdict("intercept_within_2pct", (fit.fit.intercept - 0.75).abs() <= 0.02 * 0.75);
    out.csv = Some(sweep_csv(&fit.records));
    Ok(out)
}

type Data = Box<dyn Fn(&[f64; 3], CrackSide) -> Result<f64> + Sync>;

fn boundary_data(kind: DataKind, seed: u64) -> Data {
    let tip = AnalyticField::Cracktip2D;
    match kind {
        DataKind::Cracktip => Box::new(move |p, s| tip.value(p, s)),
        DataKind::Perturbed => Box::new(move |p, s| Ok(tip.value(p, s)? + 0.3 * p[0])),
        DataKind::Constant => Box::new(|_, _| Ok(1.0)),
        DataKind::Random => {
            let d = FourierData::random(seed, 6);
            Box::new(move |p, s| d.value(p, s))
        }
    }
}

fn monotonicity(cli: &Cli, s: &Setup, a: &MonotonicityArgs, args: Vec<String>) -> Result<Outcome> {
    let analytic = match a.method {
        Method::Analytic => true,
        Method::Fem => false,
        Method::Auto => matches!(a.data, DataKind::Cracktip | DataKind::Constant),
    };
    let params = json!({
        "data": format!("{:?}", a.data).to_lowercase(),
        "dim": a.dim,
        "method": if analytic { "analytic" } else { "fem" },
        "radii": a.radii.map(|r| vec![r.0, r.1, r.2 as f64]),
        "boundary_radii": a.boundary_radii.0,
        "level": a.mesh.level,
        "grading": a.mesh.grading,
    });
    let mut out = Outcome::new(manifest(cli, s, "monotonicity", args, params));
    if analytic {
        let exp = match a.dim {
            2 => ExponentParams::planar_cracktip(),
            3 => ExponentParams::spatial_cracktip(),
            d => return Err(Error::Input(format!("closed-form profiles need dim 2 or 3, got {d}"))),
        };
        let field = match a.data {
            DataKind::Cracktip if a.dim == 2 => AnalyticField::Cracktip2D,
            DataKind::Cracktip => AnalyticField::CracktipTimesR,
            DataKind::Constant => AnalyticField::Constant(1.0),
            DataKind::Perturbed => {
                AnalyticField::Custom(HarmonicPoly::new(a.dim, 0.0, 1.0, [0.3, 0.0, 0.0], [[0.0; 3]; 3])?)
            }
            DataKind::Random => return Err(Error::Input("random data has no closed form; use --method fem".into())),
        };
        let radii = match a.radii {
            Some((lo, hi, n)) => log_radii(lo, hi, n)?,
            None => log_radii_per_decade(0.01, 10.0, 31)?,
        };
        out.manifest.tolerances.insert("energy_abs".into(), 1e-8);
        out.manifest.tolerances.insert("phi_slack".into(), 1e-6);
        let prof = energy_profile_analytic(&field, exp, &radii, s.exec)?;
        out.say(format!("alpha = {}  radii = {}", exp.alpha, radii.len()));
        out.say(format!(
            "phi in [{:.10}, {:.10}]",
            prof.phi.iter().copied().fold(f64::INFINITY, f64::min),
            prof.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        ));
        out.verdict("phi_monotone", prof.monotone);
        out.verdict("derivative_inequality", prof.inequality_holds());
        match field {
            AnalyticField::Cracktip2D => out.verdict("phi_constant", prof.phi_deviation(1.0) <= 1e-6),
            AnalyticField::CracktipTimesR => out.verdict("phi_constant", prof.phi_deviation(PI) <= 1e-6),
            AnalyticField::Constant(_) => out.verdict("phi_zero", prof.phi_deviation(0.0) == 0.0),
            AnalyticField::Custom(_) => {}
        }
        out.csv = Some(profile_csv(&prof));
        return Ok(out);
    }

    check_grading(&a.mesh)?;
    if a.dim != 2 {
        return Err(Error::Input("finite-element profiles are planar; use --dim 2".into()));
    }
    if a.mesh.level == 0 {
        return Err(Error::Input("finite-element profiles need level >= 1 for the coarse comparison".into()));
    }
    let data = boundary_data(a.data, s.opts.seed);
    let crack = CrackSpec::disk(&[(0.0, 1.0)])?;
    let fine = build_slit_disk(&crack, a.mesh.level, a.mesh.grading)?;
    let coarse = build_slit_disk(&crack, a.mesh.level - 1, a.mesh.grading)?;
    out.manifest.meshes.push(MeshStats::of(&fine));
    out.manifest.meshes.push(MeshStats::of(&coarse));
    let uf = solve_slit_disk_neumann(&fine, &data, s.exec)?;
    let uc = solve_slit_disk_neumann(&coarse, &data, s.exec)?;
    let h = fine.h_max();
    let radii = match a.radii {
        Some((lo, hi, n)) => log_radii(lo, hi, n)?,
        None => log_radii(0.1f64.max(2.5 * h), 0.85f64.min(1.0 - 2.5 * h), 20)?,
    };
    out.manifest.tolerances.insert("profile_slack_factor".into(), 5.0);
    out.manifest.tolerances.insert("boundary_slack_factor".into(), 2.0);
    let exp = ExponentParams::planar_cracktip();
    let prof = energy_profile_fem(&fine, &uf, exp, &radii, Some((&coarse, &uc)), s.exec)?;
    out.say(format!("alpha = {}  radii = {}  h_max = {h:.4}", exp.alpha, radii.len()));
    out.say(format!(
        "phi from {:.6} to {:.6}, largest slack {:.2e}",
        prof.phi[0],
        prof.phi[radii.len() - 1],
        prof.slack.iter().copied().fold(0.0, f64::max)
    ));
    out.verdict("phi_monotone", prof.monotone);
    out.verdict("derivative_inequality", prof.inequality_holds());
    for &r in &a.boundary_radii.0 {
        let b = boundary_inequality_check(&fine, &uf, exp, r, Some((&coarse, &uc)), s.exec)?;
        out.say(format!("r = {r}: lhs = {:.8}  rhs = {:.8}  slack = {:.2e}", b.lhs, b.rhs, b.slack));
        out.verdict(&format!("boundary_inequality_r{r}"), b.pass);
    }
    out.csv = Some(profile_csv(&prof));
    Ok(out)
}

fn convergence(cli: &Cli, s: &Setup, a: &ConvergenceArgs, args: Vec<String>) -> Result<Outcome> {
    if !(a.grading >= 1.0) {
        return Err(Error::Input(format!("grading must be >= 1, got {}", a.grading)));
    }
    let target = match a.target {
        Target::Lambda1HalfEquator => "lambda1_half_equator",
        Target::PhiCracktip => "phi_cracktip",
    };
    let params = json!({"levels": a.levels.0, "target": target, "grading": a.grading});
    let mut out = Outcome::new(manifest(cli, s, "convergence", args, params));
    let mut values = Vec::with_capacity(a.levels.0.len());
    for &level in &a.levels.0 {
        let v = match a.target {
            Target::Lambda1HalfEquator => lambda1_sphere_minus_arc(FRAC_PI_2, level, a.grading, &s.opts)?,
            Target::PhiCracktip => {
                let mesh = build_slit_disk(&CrackSpec::disk(&[(0.0, 1.0)])?, level, a.grading)?;
                let tip = AnalyticField::Cracktip2D;
                let u = solve_slit_disk_neumann(&mesh, |p, side| tip.value(p, side), s.exec)?;
                ball_energy(&mesh, &u, 0.5, s.exec)? / 0.5
            }
        };
        values.push(v);
    }
    let mut csv = String::from("level,value,delta,rate\n");
    let mut deltas: Vec<f64> = Vec::new();
    for (i, (&level, &v)) in a.levels.0.iter().zip(&values).enumerate() {
        let delta = (i > 0).then(|| (v - values[i - 1]).abs());
        let rate = match (delta, deltas.last()) {
            (Some(d), Some(&prev)) if d > 0.0 => Some((prev / d).log2()),
            _ => None,
        };
        let fmt = |x: Option<f64>| x.map(|x| format!("{x:?}")).unwrap_or_default();
        csv.push_str(&format!("{level},{v:?},{},{}\n", fmt(delta), fmt(rate)));
        out.say(format!("level {level}: value = {v:.8}  delta = {}  rate = {}", fmt(delta), fmt(rate)));
        deltas.extend(delta);
    }
    if deltas.len() >= 2 {
        out.verdict("deltas_shrink", deltas.windows(2).all(|w| w[1] < w[0]));
    }
    out.csv = Some(csv);
    Ok(out)
}

/// Lengths of the arcs left after removing merged cuts from the circle.
fn remaining_arcs(crack: &CrackSpec) -> Vec<f64> {
    let mut cuts = crack.arcs().to_vec();
    if cuts.is_empty() {
        return vec![TAU];
    }
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<f64> = cuts.windows(2).map(|w| w[1].0 - w[0].1).collect();
    out.push(cuts[0].0 + TAU - cuts[cuts.len() - 1].1);
    out.retain(|l| *l > 1e-12);
    out
}

fn circle(cli: &Cli, s: &Setup, a: &CircleArgs, args: Vec<String>) -> Result<Outcome> {
    let params = json!({"cuts": a.cuts.0, "segments": a.segments});
    let mut out = Outcome::new(manifest(cli, s, "circle", args, params));
    let crack = CrackSpec::circle(&a.cuts.0)?;
    let lambda = lambda1_circle_minus(&a.cuts.0, a.segments, &s.opts)?;
    let arcs = remaining_arcs(&crack);
    out.say(format!("lambda1 = {lambda:.8}"));
    let mut csv = String::from("arc_length,closed_form\n");
    if crack.is_empty() {
        // the closed circle of length 2 pi has first eigenvalue 1
        out.say("closed circle: lambda1 = 1".to_string());
        out.verdict("closed_form_0.5pct", (lambda - 1.0).abs() <= 0.005);
        csv.push_str(&format!("{:?},1.0\n", TAU));
    } else {
        let mut best = f64::INFINITY;
        for &l in &arcs {
            let c = circle_arc_lambda1(l)?;
            best = best.min(c);
            out.say(format!("arc {l:.6}: (pi/|I|)^2 = {c:.8}"));
            csv.push_str(&format!("{l:?},{c:?}\n"));
        }
        out.verdict("closed_form_0.5pct", (lambda - best).abs() <= 0.005 * best);
    }
    out.csv = Some(csv);
    Ok(out)
}

fn replay(a: &ReplayArgs) -> Result<Outcome> {
    use clap::Parser;
    let recorded = RunManifest::read(&a.manifest)?;
    let mut argv = vec!["slitspec".to_string()];
    argv.extend(recorded.args.iter().cloned());
    let cli = Cli::try_parse_from(&argv).map_err(|e| Error::Input(format!("manifest arguments do not parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::Input("a replay manifest cannot record another replay".into()));
    }
    let fresh = run(&cli, recorded.args.clone())?;
    let params = json!({"manifest": a.manifest.display().to_string(), "rel_tol": a.rel_tol});
    let mut out = Outcome::new(RunManifest::new("replay", Vec::new(), params, recorded.seed));
    out.manifest.tolerances.insert("rel_tol".into(), a.rel_tol);
    out.verdict("input_hash", fresh.manifest.input_hash == recorded.input_hash);
    let same_verdicts: BTreeMap<_, _> = fresh.manifest.verdicts.clone();
    out.verdict("verdicts_match", same_verdicts == recorded.verdicts);
    if let (Some(name), Some(csv)) = (recorded.outputs.first(), &fresh.csv) {
        let dir = a.manifest.parent().unwrap_or(Path::new("."));
        let old = std::fs::read_to_string(dir.join(name))?;
        let diff = csv_difference(&old, csv)?;
        match diff {
            Some(d) => {
                out.say(format!("largest relative CSV difference {d:.3e}"));
                out.verdict("csv_matches", d <= a.rel_tol);
            }
            None => out.verdict("csv_matches", false),
        }
    }
    Ok(out)
}

/// Largest relative difference between two CSVs of the same shape, timing
/// columns excluded; `None` when the shapes differ.
fn csv_difference(a: &str, b: &str) -> Result<Option<f64>> {
    let (ha, ra) = read_csv(a)?;
    let (hb, rb) = read_csv(b)?;
    if ha != hb || ra.len() != rb.len() {
        return Ok(None);
    }
    let skip: Vec<bool> = ha.iter().map(|h| h == "seconds").collect();
    let mut worst = 0.0f64;
    for (x, y) in ra.iter().zip(&rb) {
        for (k, (p, q)) in x.iter().zip(y).enumerate() {
            if skip[k] || (p.is_nan() && q.is_nan()) {
                continue;
            }
            if p.is_nan() != q.is_nan() {
                return Ok(Some(f64::INFINITY));
            }
            worst = worst.max((p - q).abs() / p.abs().max(1.0));
        }
    }
    Ok(Some(worst))
}
