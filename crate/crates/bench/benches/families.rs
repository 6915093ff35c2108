use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use relmu::bench::{with_deep_stack, Family, Toggles};
use relmu::prove;
use relmu_bench::case;

const CASES: [(Family, &str); 6] = [
    (Family::Fischer, "as"),
    (Family::Fischer, "al"),
    (Family::Csma, "al"),
    (Family::Csma, "m2"),
    (Family::Grc, "as"),
    (Family::Leader, "as"),
];

fn families(c: &mut Criterion) {
    let mut group = c.benchmark_group("families");
    group.sample_size(10).measurement_time(Duration::from_secs(5));
    for (family, spec) in CASES {
        for n in 2..=3 {
            let (ta, mes) = case(family, n, spec);
            let id = BenchmarkId::new(format!("{family}-{spec}"), n);
            group.bench_with_input(id, &n, |b, _| {
                b.iter(|| with_deep_stack(|| prove(&ta, &mes, Toggles::default().config(None)).unwrap().valid))
            });
        }
    }
    group.finish();
}

fn memo(c: &mut Criterion) {
    let (ta, mes) = case(Family::Fischer, 2, "as");
    let mut group = c.benchmark_group("memo");
    group.sample_size(10);
    for memo in [true, false] {
        let toggles = Toggles { memo, ..Toggles::default() };
        group.bench_function(if memo { "on" } else { "off" }, |b| {
            b.iter(|| with_deep_stack(|| prove(&ta, &mes, toggles.config(None)).unwrap().valid))
        });
    }
    group.finish();
}

criterion_group!(benches, families, memo);
criterion_main!(benches);
