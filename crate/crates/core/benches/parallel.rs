use std::f64::consts::FRAC_PI_2;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slitspec::assembly::{assemble_stiffness, assemble_weighted_energy};
use slitspec::eigensolve::{mesh_eigenpairs, EigenOptions};
use slitspec::monotonicity::{energy_profile_analytic, log_radii, AnalyticField, ExponentParams};
use slitspec::slitmesh::{build_slit_disk, build_slit_sphere, CrackSpec};
use slitspec::spectra::sweep_betas;
use slitspec::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn assembly(c: &mut Criterion) {
    let sphere = build_slit_sphere(&CrackSpec::sphere_arc(FRAC_PI_2).unwrap(), 6, 2.0).unwrap();
    let disk = build_slit_disk(&CrackSpec::disk(&[(0.0, 1.0)]).unwrap(), 5, 2.0).unwrap();
    let u = AnalyticField::Cracktip2D.sample_on(&disk).unwrap();
    let mut g = c.benchmark_group("assembly");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("stiffness_sphere_l6", name), &exec, |b, &e| {
            b.iter(|| assemble_stiffness(&sphere, e).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("weighted_energy_disk_l5", name), &exec, |b, &e| {
            b.iter(|| assemble_weighted_energy(&disk, &u, 3, e).unwrap())
        });
    }
    g.finish();
}

fn eigen(c: &mut Criterion) {
    let mesh = build_slit_sphere(&CrackSpec::sphere_arc(FRAC_PI_2).unwrap(), 5, 2.0).unwrap();
    let mut g = c.benchmark_group("eigensolve");
    g.sample_size(10);
    for (name, exec) in MODES {
        let opts = EigenOptions { exec, ..EigenOptions::default() };
        g.bench_with_input(BenchmarkId::new("half_equator_l5", name), &opts, |b, o| {
            b.iter(|| mesh_eigenpairs(&mesh, 4, o).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("sweep_4_betas_l3", name), &opts, |b, o| {
            b.iter(|| sweep_betas(&[0.3, 0.4, 0.5, 0.6].map(|t| t * std::f64::consts::PI), 3, 2.0, o).unwrap())
        });
    }
    g.finish();
}

fn energy(c: &mut Criterion) {
    let radii = log_radii(0.01, 10.0, 32).unwrap();
    let mut g = c.benchmark_group("energy_profile");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("cracktip_x_r_32_radii", name), &exec, |b, &e| {
            b.iter(|| {
                energy_profile_analytic(&AnalyticField::CracktipTimesR, ExponentParams::spatial_cracktip(), &radii, e)
                    .unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, assembly, eigen, energy);
criterion_main!(benches);
