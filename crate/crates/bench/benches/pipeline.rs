use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use eqod_bench::fixture;
use eqod_core::library::LibrarySpec;
use eqod_core::pipeline::{run_eqod, run_wf_lasso_baseline, PipelineConfig};
use eqod_core::solvers::{generate_clean_set, Pde, PdeSpec};
use eqod_core::symmetry::detect_all;
use eqod_core::weak::{make_test_grid, WeakAssembler, STAGE3_CENTERS};

fn solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("generate");
    g.sample_size(10);
    for pde in [Pde::Burgers, Pde::Ks] {
        let spec = PdeSpec::new(pde);
        let grid = spec.grid(128, 128).unwrap();
        g.bench_function(pde.id(), |b| b.iter(|| generate_clean_set(&spec, &grid, 1, black_box(42)).unwrap()));
    }
    g.finish();
}

fn weak_form(c: &mut Criterion) {
    let set = fixture(Pde::Burgers, 128, 3, 0.1);
    let asm = WeakAssembler::new(&set).unwrap();
    let (nt, nx) = STAGE3_CENTERS;
    let tg = make_test_grid(asm.grid(), nt, nx).unwrap();
    let lib = LibrarySpec::standard();
    c.bench_function("assemble_standard", |b| b.iter(|| asm.assemble(black_box(&lib), &tg).unwrap()));
    c.bench_function("derivatives_and_assembly", |b| {
        b.iter(|| WeakAssembler::new(black_box(&set)).unwrap().assemble(&lib, &tg).unwrap())
    });
}

fn identification(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let mut g = c.benchmark_group("identify");
    g.sample_size(10);
    for (pde, sigma) in [(Pde::Burgers, 0.1), (Pde::Heat, 0.1)] {
        let set = fixture(pde, 128, 3, sigma);
        g.bench_function(format!("detect_{}", pde.id()), |b| b.iter(|| detect_all(black_box(&set))));
        g.bench_function(format!("eqod_{}", pde.id()), |b| b.iter(|| run_eqod(black_box(&set), 42, &cfg).unwrap()));
        g.bench_function(format!("wf_lasso_{}", pde.id()), |b| {
            b.iter(|| run_wf_lasso_baseline(black_box(&set), 42, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, solvers, weak_form, identification);
criterion_main!(benches);
