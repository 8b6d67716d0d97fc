#![allow(dead_code)]

use meager_core::harness::{GoalPlan, PosetRef, Scenario};
use meager_core::poset::PosetSpec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn spec(elements: &[&str], relations: &[(&str, &str)]) -> PosetSpec {
    PosetSpec {
        elements: elements.iter().map(|s| s.to_string()).collect(),
        relations: relations
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        cofinal_set: None,
    }
}

/// Every poset on one to three points, up to isomorphism.
pub fn small_posets() -> Vec<PosetSpec> {
    vec![
        spec(&["a"], &[]),
        spec(&["a", "b"], &[]),
        spec(&["a", "b"], &[("a", "b")]),
        spec(&["a", "b", "c"], &[]),
        spec(&["a", "b", "c"], &[("a", "b")]),
        spec(&["a", "b", "c"], &[("a", "b"), ("b", "c")]),
        spec(&["a", "b", "c"], &[("a", "c"), ("b", "c")]),
        spec(&["a", "b", "c"], &[("a", "b"), ("a", "c")]),
    ]
}

/// A random order on `1..=max` points: a random DAG on shuffled labels.
pub fn random_poset(rng: &mut ChaCha8Rng, max: usize) -> PosetSpec {
    let n = rng.gen_range(1..=max);
    let mut labels: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.gen_range(0..=i));
    }
    let density = rng.gen_range(0.15..0.6);
    let mut relations = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                relations.push((labels[i].clone(), labels[j].clone()));
            }
        }
    }
    PosetSpec {
        elements: labels,
        relations,
        cofinal_set: None,
    }
}

pub fn scenario(poset: PosetSpec, reals: &[&str], seed: u64) -> Scenario {
    Scenario {
        poset: PosetRef::Inline(poset),
        resolution: 200_000,
        seed,
        ground_reals: reals.iter().map(|s| s.parse().unwrap()).collect(),
        goals: GoalPlan {
            min_length: 12,
            disagreements: 2,
            violations: 3,
            dominate: true,
            omit_goals_for: Vec::new(),
            cohen_per_element: false,
        },
    }
}

pub const FIVE_REALS: [&str; 5] = [
    "zeros",
    "ones",
    "periodic:01",
    "periodic:0110",
    "seeded-random:1",
];

/// A random increasing sequence in `0..=bound` with a random density drawn
/// from `range`.
pub fn random_inc(rng: &mut ChaCha8Rng, bound: u64, range: std::ops::Range<f64>) -> Vec<u64> {
    let density = rng.gen_range(range);
    loop {
        let v: Vec<u64> = (0..=bound).filter(|_| rng.gen_bool(density)).collect();
        if v.len() >= 2 {
            return v;
        }
    }
}

pub fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<bool> {
    (0..len).map(|_| rng.gen()).collect()
}

/// Independent scan: does `z` differ from `x` somewhere in every block
/// `[s(n), s(n+1))` with `n ≥ m` and `s(n+1) ≤ limit`?
pub fn differs_on_every_block(z: &[bool], x: &[bool], s: &[u64], m: usize, limit: u64) -> bool {
    s.windows(2)
        .enumerate()
        .skip(m)
        .filter(|(_, w)| w[1] <= limit)
        .all(|(_, w)| (w[0]..w[1]).any(|j| z[j as usize] != x[j as usize]))
}
