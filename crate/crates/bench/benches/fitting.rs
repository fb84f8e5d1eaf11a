use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use marginloss::boosting::{train_adaboost, BoostOptions};
use marginloss::estimator::{empirical_risk, fit};
use marginloss::loss_factory::NamedLoss;
use marginloss::{FitOptions, ModelSpec};
use marginloss_bench::logistic_data;

fn risk_and_fit(c: &mut Criterion) {
    let data = logistic_data(20_000, 7);
    let spec = ModelSpec::Linear { intercept: true };
    let beta = [0.1, 0.5, -1.0, 0.25];
    let mut group = c.benchmark_group("estimator");
    group.sample_size(20);
    for name in [NamedLoss::Exponential, NamedLoss::Logistic, NamedLoss::Savage] {
        let loss = name.conformable().expect("conformable");
        group.bench_function(format!("risk/{}", name.identifier()), |b| {
            b.iter(|| empirical_risk(&loss, &spec, black_box(&beta), &data).unwrap())
        });
    }
    let logistic = NamedLoss::Logistic.conformable().expect("conformable");
    group.bench_function("fit/logistic", |b| b.iter(|| fit(&logistic, &spec, &data, &FitOptions::default()).unwrap()));
    group.finish();
}

fn adaboost(c: &mut Criterion) {
    let data = logistic_data(2_000, 11);
    let mut group = c.benchmark_group("boosting");
    group.sample_size(10);
    group.bench_function("adaboost/50_stages", |b| {
        b.iter(|| train_adaboost(&data, black_box(50), &BoostOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, risk_and_fit, adaboost);
criterion_main!(benches);
