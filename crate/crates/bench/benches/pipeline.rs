//! Benchmarks for the hot paths: P1 assembly, the preconditioned
//! conjugate-gradient solve, a full coupled time step, and the
//! oscillator/mollifier series.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use mcirc_core::assembly::{assemble_mass, assemble_stiffness};
use mcirc_core::config::parse_config_str;
use mcirc_core::hrf::build_series;
use mcirc_core::mesh::{generate_box_mesh, CompartmentId, TetMesh};
use mcirc_core::pipeline::prepare;
use mcirc_core::sparse::cg_solve;
use mcirc_core::vasculature::VesselParams;

fn box_mesh(n: usize) -> TetMesh {
    generate_box_mesh(n, n, n, [0.084; 3], [-0.042; 3], CompartmentId(0)).unwrap()
}

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    for n in [8usize, 16, 24] {
        let mesh = box_mesh(n);
        let coeff = vec![7.8e-6; mesh.tet_count()];
        group.bench_with_input(BenchmarkId::new("mass", n), &mesh, |b, m| {
            b.iter(|| assemble_mass(black_box(m)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("stiffness", n), &mesh, |b, m| {
            b.iter(|| assemble_stiffness(black_box(m), black_box(&coeff)).unwrap())
        });
    }
    group.finish();
}

fn bench_cg(c: &mut Criterion) {
    let mut group = c.benchmark_group("cg_solve");
    for n in [8usize, 16] {
        let mesh = box_mesh(n);
        let mass = assemble_mass(&mesh).unwrap();
        let stiff = assemble_stiffness(&mesh, &vec![7.8e-6; mesh.tet_count()]).unwrap();
        let system = mass.add_scaled(&stiff, 0.25);
        let rhs: Vec<f64> = (0..mesh.node_count())
            .map(|i| ((i * 31 + 7) % 97) as f64 / 97.0)
            .collect();
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| {
                cg_solve(
                    black_box(&system),
                    black_box(&rhs),
                    1e-10,
                    20 * mesh.node_count(),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_coupled_step(c: &mut Criterion) {
    let cfg = parse_config_str(
        "
        [mesh]
        nx = 16
        ny = 16
        nz = 16
        [rois]
        roi = center 0 0 0 0.02
        ",
    )
    .unwrap();
    let p = prepare(cfg).unwrap();
    c.bench_function("coupled_step_16", |b| {
        b.iter_batched(
            || p.system.init_state(),
            |mut state| p.system.step(&mut state, &p.source).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
}

fn bench_hrf(c: &mut Criterion) {
    let params = VesselParams::default();
    c.bench_function("hrf_series", |b| {
        b.iter(|| build_series(black_box(&params), Some(0.2)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_assembly,
    bench_cg,
    bench_coupled_step,
    bench_hrf
);
criterion_main!(benches);
