use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rfi_qsdc::decoy::solve_lp;
use rfi_qsdc::{evaluate_point, optimize_mu, ChannelSpec, ModelOptions, MuSearch};
use rfi_qsdc_bench::decoy_lp;

fn lp(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_lp");
    for a in [2.0, 10.0] {
        let lp = decoy_lp(a, 0.05);
        g.bench_with_input(BenchmarkId::from_parameter(a), &lp, |b, lp| b.iter(|| solve_lp(black_box(lp))));
    }
    g.finish();
}

fn point(c: &mut Criterion) {
    let opts = ModelOptions::default();
    c.bench_function("evaluate_point", |b| {
        b.iter(|| evaluate_point(&ChannelSpec::REFERENCE, black_box(10.0), 0.0, 0.016, &opts))
    });
}

fn optimize(c: &mut Criterion) {
    let opts = ModelOptions::default();
    let search = MuSearch::default();
    let mut g = c.benchmark_group("optimize_mu");
    g.sample_size(20);
    g.bench_function("10dB", |b| {
        b.iter(|| optimize_mu(&ChannelSpec::REFERENCE, black_box(10.0), 0.0, &search, &opts))
    });
    g.finish();
}

criterion_group!(benches, lp, point, optimize);
criterion_main!(benches);
