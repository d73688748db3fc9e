use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use aanewton_core::fem::{assemble_newton_linearization, assemble_vector_mass};
use aanewton_core::linalg::SparseLu;
use aanewton_core::{newton_operator, AndersonHistory, Pattern, ProblemSetup, State};

fn setup(n: usize) -> ProblemSetup {
    ProblemSetup::cavity(n, Pattern::Crossed, 1e-2).unwrap()
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("newton_linearization");
    for n in [8, 16, 32] {
        let s = setup(n);
        let u = s.initial_state().velocity;
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| assemble_newton_linearization(black_box(&u), &s.mesh, &s.dofmap).unwrap())
        });
    }
    g.finish();
}

fn factor_and_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("laplacian_lu");
    g.sample_size(20);
    for n in [8, 16, 32] {
        let s = setup(n);
        // The mass shift makes the pure-Neumann Laplacian nonsingular.
        let mass = assemble_vector_mass(&s.mesh, &s.dofmap);
        let a = s.laplacian.linear_combination(1.0, &mass, 1.0).unwrap();
        let rhs = vec![1.0; a.nrows()];
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| SparseLu::factor(black_box(&a)).unwrap().solve(&rhs).unwrap())
        });
    }
    g.finish();
}

fn operator(c: &mut Criterion) {
    let mut g = c.benchmark_group("newton_operator");
    g.sample_size(10);
    for n in [8, 16] {
        let s = setup(n);
        let u = s.initial_state();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| newton_operator(&s, black_box(&u)).unwrap()));
    }
    g.finish();
}

fn anderson_mix(c: &mut Criterion) {
    let s = setup(16);
    let nv = s.dofmap.n_velocity;
    let mut g = c.benchmark_group("anderson_mix");
    for m in [1, 5, 10] {
        let mut hist = AndersonHistory::new(m);
        for k in 0..=m {
            let y: Vec<f64> = (0..nv).map(|i| ((i * (k + 3)) as f64 * 0.37).sin()).collect();
            let out = State { velocity: y.clone(), pressure: vec![0.0; s.dofmap.n_pressure] };
            hist.push(&s.laplacian, out, y).unwrap();
        }
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| b.iter(|| black_box(&hist).mix().unwrap()));
    }
    g.finish();
}

criterion_group!(benches, assembly, factor_and_solve, operator, anderson_mix);
criterion_main!(benches);
