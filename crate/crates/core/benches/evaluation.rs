use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rgm_core::batch::{max_rgm_all, Execution};
use rgm_core::data::{Dataset, Dmu};
use rgm_core::technology::{Technology, TradeoffSpec};

fn technology(n: usize, k: usize) -> Technology {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dmus = (0..n)
        .map(|j| Dmu {
            id: j + 1,
            name: format!("u{}", j + 1),
            x: (0..3).map(|_| rng.gen_range(1.0..100.0)).collect(),
            y: (0..3).map(|_| rng.gen_range(1.0..50.0)).collect(),
        })
        .collect();
    let labels = |p: &str| (0..3).map(|i| format!("{p}_{i}")).collect();
    let ds = Dataset::new(labels("x"), labels("y"), dmus).unwrap();
    let mut spec = TradeoffSpec::empty();
    for t in 0..k {
        let (p, q) = (t % n, (t * 7 + 1) % n);
        let (a, b) = (&ds.dmus()[p], &ds.dmus()[q]);
        spec.push(
            None,
            a.x.iter().zip(&b.x).map(|(u, v)| u - v).collect(),
            a.y.iter().zip(&b.y).map(|(u, v)| u - v).collect(),
        );
    }
    Technology::vrs_to(ds, spec).unwrap()
}

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("max_rgm_all");
    group.sample_size(10);
    for &(n, k) in &[(40, 0), (90, 200)] {
        let tech = technology(n, k);
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(
                BenchmarkId::new(format!("{exec:?}"), format!("n{n}_k{k}")),
                &tech,
                |b, t| b.iter(|| max_rgm_all(t, exec)),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, evaluation);
criterion_main!(benches);
