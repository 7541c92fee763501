use std::hint::black_box;

use copula_crm::inference::sample_posterior;
use copula_crm::model::{mtd_curve, prob_dlt};
use copula_crm::simulation::{run_trial, WorkingModel};
use copula_crm::*;
use copula_crm_bench::patients;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn model(c: &mut Criterion) {
    let p = ModelParams::new(1.1, 0.9, 1.0, 0.5);
    let d = StandardizedDose::new(0.2, 0.15);
    c.bench_function("prob_dlt", |b| b.iter(|| prob_dlt(black_box(d), black_box(&p))));
    let bounds = DoseBounds::default();
    c.bench_function("mtd_curve_101", |b| {
        b.iter(|| mtd_curve(black_box(&p), 0.3, 101, bounds, bounds).unwrap())
    });
}

fn posterior(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_posterior");
    g.sample_size(20);
    let mcmc = McmcConfig::default();
    for n in [10, 40] {
        let data = patients(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &data, |b, data| {
            b.iter(|| sample_posterior(data, &PriorSpec::default(), &mcmc).unwrap())
        });
    }
    g.finish();
}

fn trial(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_trial");
    g.sample_size(10);
    let scenario = Scenario::working_model("bench", WorkingModel::new(1.1, 1.1, 1.0), 0.3);
    let config = DesignConfig::default();
    g.bench_function("n40", |b| b.iter(|| run_trial(&scenario, &config, 7).unwrap()));
    g.finish();
}

criterion_group!(benches, model, posterior, trial);
criterion_main!(benches);
