#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rgm_core::data::{Dataset, Dmu};
use rgm_core::technology::{Technology, TradeoffSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values on a 1/8 grid keep the exact oracle's rationals small.
fn grid(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let steps = ((hi - lo) * 8.0) as i64;
    lo + rng.gen_range(0..=steps) as f64 / 8.0
}

pub fn dataset(rng: &mut ChaCha8Rng, n: usize, m: usize, s: usize) -> Dataset {
    let dmus = (0..n)
        .map(|k| Dmu {
            id: k + 1,
            name: format!("d{}", k + 1),
            x: (0..m).map(|_| grid(rng, 0.5, 4.0)).collect(),
            y: (0..s).map(|_| grid(rng, 0.5, 4.0)).collect(),
        })
        .collect();
    Dataset::new(
        (0..m).map(|i| format!("x_{i}")).collect(),
        (0..s).map(|r| format!("y_{r}")).collect(),
        dmus,
    )
    .unwrap()
}

/// Directions consistent with a random positive price, so the multiplier
/// system of the positivity check is never empty.
pub fn priced_tradeoffs(rng: &mut ChaCha8Rng, k: usize, m: usize, s: usize) -> TradeoffSpec {
    let price_v: Vec<f64> = (0..m).map(|_| grid(rng, 0.25, 2.0)).collect();
    let price_u: Vec<f64> = (0..s).map(|_| grid(rng, 0.25, 2.0)).collect();
    let mut spec = TradeoffSpec::empty();
    while spec.len() < k {
        let mut rm: Vec<f64> = (0..m).map(|_| grid(rng, -2.0, 2.0)).collect();
        let mut rp: Vec<f64> = (0..s).map(|_| grid(rng, -2.0, 2.0)).collect();
        let value: f64 = rm.iter().zip(&price_v).map(|(a, b)| a * b).sum::<f64>()
            - rp.iter().zip(&price_u).map(|(a, b)| a * b).sum::<f64>();
        if value == 0.0 {
            continue;
        }
        if value < 0.0 {
            rm.iter_mut().chain(rp.iter_mut()).for_each(|c| *c = -*c);
        }
        spec.push(None, rm, rp);
    }
    spec
}

/// Random instance with `m + s <= 4` and at most 8 intensity columns.
pub fn tiny_technology(rng: &mut ChaCha8Rng, with_tradeoffs: bool) -> Technology {
    let m = rng.gen_range(1..=2);
    let s = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=5);
    let ds = dataset(rng, n, m, s);
    if with_tradeoffs {
        let k = rng.gen_range(1..=(8 - n).min(4));
        Technology::vrs_to(ds, priced_tradeoffs(rng, k, m, s)).unwrap()
    } else {
        Technology::vrs(ds)
    }
}
