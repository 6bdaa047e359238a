//! Parallel versus single-threaded cost of the main kernels.
//!
//! With the `parallel` feature each kernel runs twice: on the global rayon
//! pool and inside a one-thread pool. Without it only the sequential path is
//! measured.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use divrbf::direct::{assemble_system, fit_direct, TangentFieldSamples};
use divrbf::geom::hammersley_nodes;
use divrbf::harness::{TargetField, TargetKind};
use divrbf::kernels::{KernelConfig, KernelKind};
use divrbf::rbfqr::build_stable_basis;

type Runner = Box<dyn Fn(&mut (dyn FnMut() + Send))>;

fn modes() -> Vec<(&'static str, Runner)> {
    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        vec![
            ("rayon", Box::new(|f: &mut (dyn FnMut() + Send)| f())),
            ("single", Box::new(move |f: &mut (dyn FnMut() + Send)| single.install(f))),
        ]
    }
    #[cfg(not(feature = "parallel"))]
    {
        vec![("sequential", Box::new(|f: &mut (dyn FnMut() + Send)| f()))]
    }
}

fn kernels(c: &mut Criterion) {
    let nodes = hammersley_nodes(300);
    let config = KernelConfig::new(KernelKind::Mq, 2.0).unwrap();
    let target = TargetField::new(TargetKind::PaperGaussians);
    let samples = TangentFieldSamples::from_field(nodes.clone(), |p| target.field(p)).unwrap();
    let fit = fit_direct(&config, &samples).unwrap();
    let eval = hammersley_nodes(4000);

    let mut group = c.benchmark_group("n300");
    group.sample_size(10);
    for (name, run) in modes() {
        group.bench_function(BenchmarkId::new("assemble_system", name), |b| {
            b.iter(|| run(&mut || drop(std::hint::black_box(assemble_system(&config, &nodes)))))
        });
        group.bench_function(BenchmarkId::new("build_stable_basis", name), |b| {
            b.iter(|| run(&mut || drop(std::hint::black_box(build_stable_basis(&config, &nodes).unwrap()))))
        });
        group.bench_function(BenchmarkId::new("eval_many", name), |b| {
            b.iter(|| run(&mut || drop(std::hint::black_box(fit.eval_many(&eval)))))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
