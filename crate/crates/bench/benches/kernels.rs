use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use psda_core::gmm::gmm_fit;
use psda_core::otreg::gradcheck::random_instance;
use psda_core::otreg::{cost_matrix, sinkhorn, uniform_marginal};
use psda_core::synth::{synonym_data, SynonymConfig};
use psda_core::{affinity_regularization, build_cluster_model, GmmConfig, KPolicy, OtParams};

fn bench_sinkhorn(c: &mut Criterion) {
    let mut g = c.benchmark_group("sinkhorn");
    for n in [16usize, 64, 128] {
        let (o, a) = random_instance(n as u64, n, 32);
        let cost = cost_matrix(&o, &a).unwrap();
        let h = uniform_marginal(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| sinkhorn(black_box(&cost), &h, &h, 0.1, 1000, 1e-9).unwrap())
        });
    }
    g.finish();
}

fn bench_affinity(c: &mut Criterion) {
    let mut g = c.benchmark_group("affinity_regularization");
    for (n, d) in [(16usize, 64usize), (32, 300), (64, 768)] {
        let (o, a) = random_instance(7, n, d);
        let params = OtParams::default();
        g.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{d}")), &n, |b, _| {
            b.iter(|| affinity_regularization(black_box(&o), black_box(&a), &params).unwrap())
        });
    }
    g.finish();
}

fn bench_gmm(c: &mut Criterion) {
    let data = synonym_data(&SynonymConfig::three_languages(1));
    let points: Vec<Vec<f64>> = data.stores.values().flat_map(|s| s.iter().map(|(_, v)| v.to_vec())).collect();
    let mut g = c.benchmark_group("gmm_fit");
    for k in [5usize, 10, 20] {
        let cfg = GmmConfig { k, ..GmmConfig::default() };
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| b.iter(|| gmm_fit(black_box(&points), &cfg).unwrap()));
    }
    g.finish();
}

fn bench_domino(c: &mut Criterion) {
    let data = synonym_data(&SynonymConfig::three_languages(2));
    c.bench_function("build_cluster_model/3x50", |b| {
        b.iter(|| {
            build_cluster_model(&data.stores, &data.tagging, &data.taxonomy, KPolicy::fixed(10), &GmmConfig::default())
                .unwrap()
        })
    });
}

criterion_group!(benches, bench_sinkhorn, bench_affinity, bench_gmm, bench_domino);
criterion_main!(benches);
