use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use marginloss::loss_factory::NamedLoss;
use marginloss_bench::margin_grid;

fn loss_evaluation(c: &mut Criterion) {
    let grid = margin_grid(-8.0, 8.0, 257);
    let mut group = c.benchmark_group("loss_eval");
    for name in [NamedLoss::Logistic, NamedLoss::Savage, NamedLoss::Gaussian { m: 1.0 }, NamedLoss::Laplace { m: 2.0 }] {
        let loss = name.conformable().expect("conformable");
        let id = name.identifier();
        group.bench_function(format!("{id}/closed"), |b| {
            b.iter(|| grid.iter().map(|&v| loss.eval(black_box(v)).unwrap()).sum::<f64>())
        });
        group.bench_function(format!("{id}/quadrature"), |b| {
            b.iter(|| grid.iter().map(|&v| loss.eval_quadrature(black_box(v)).unwrap()).sum::<f64>())
        });
    }
    group.finish();
}

criterion_group!(benches, loss_evaluation);
criterion_main!(benches);
