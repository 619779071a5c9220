//! Compares the worker-pool sweep against the sequential fallback, plus the
//! cost of one full-order solve. Build with `--no-default-features` to see
//! the pool path collapse onto the sequential one.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::{DMatrix, DVector};

use stpod::error::c_rho_t;
use stpod::experiment::{run_sweep, run_sweep_sequential, SweepContext};
use stpod::field::CoefficientField;
use stpod::grid::{BoundaryMode, GramianSet, Grid1D};
use stpod::pod::{weighted_svd, ProjectionOrder};
use stpod::solver::{assemble_rhs, project_initial, solve_fom_with, ProblemSpec, QuadratureSpec};

struct Fixture {
    g: GramianSet,
    fom: CoefficientField,
    f_mat: DMatrix<f64>,
    ic: DVector<f64>,
    sigma_full: DVector<f64>,
    crt: f64,
}

fn fixture(n: usize) -> Fixture {
    let tg = Grid1D::uniform(0.0, 1.0, n, BoundaryMode::AllNodes).unwrap();
    let xg = Grid1D::uniform(0.0, 1.0, n, BoundaryMode::ZeroDirichlet).unwrap();
    let g = GramianSet::assemble(&tg, &xg, 1.0).unwrap();
    let problem = ProblemSpec::example2(1.0);
    let quad = QuadratureSpec { order: 3, subdivision: 2 };
    let f_mat = assemble_rhs(&problem.forcing, &tg, &xg, &quad).unwrap();
    let ic = project_initial(&problem.initial, &xg, &g, &quad).unwrap();
    let fom = solve_fom_with(&f_mat, &ic, &g).unwrap();
    let sigma_full = weighted_svd(&fom, &g).unwrap().sigma;
    let crt = c_rho_t(&g);
    Fixture { g, fom, f_mat, ic, sigma_full, crt }
}

fn sweep_points(max: usize) -> Vec<(usize, usize)> {
    (2..=max).step_by(2).map(|k| (k, k)).collect()
}

fn bench_sweep(c: &mut Criterion) {
    let fx = fixture(41);
    let ctx = SweepContext {
        g: &fx.g,
        fom: &fx.fom,
        f_mat: &fx.f_mat,
        ic: &fx.ic,
        sigma_full: &fx.sigma_full,
        c_rho_t: fx.crt,
        order: ProjectionOrder::SpaceFirst,
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for max in [8usize, 16] {
        let points = sweep_points(max);
        group.bench_with_input(BenchmarkId::new("parallel", max), &points, |b, pts| {
            b.iter(|| run_sweep(&ctx, pts).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", max), &points, |b, pts| {
            b.iter(|| run_sweep_sequential(&ctx, pts).unwrap())
        });
    }
    group.finish();
}

fn bench_fom_solve(c: &mut Criterion) {
    let fx = fixture(61);
    c.bench_function("fom_solve_61", |b| {
        b.iter(|| solve_fom_with(&fx.f_mat, &fx.ic, &fx.g).unwrap())
    });
}

criterion_group!(benches, bench_sweep, bench_fom_solve);
criterion_main!(benches);
