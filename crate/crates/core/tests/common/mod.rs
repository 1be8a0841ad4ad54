#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use pathlearn::structures::HpInstance;
use pathlearn::tree_learn::WeightMatrix;
use pathlearn::{Branching, DiscreteDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dataset with dependencies: each variable copies an earlier one
/// with some probability, otherwise draws uniformly.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, cases: usize, max_card: u32) -> DiscreteDataset {
    let card: Vec<u32> = (0..n).map(|_| rng.random_range(2..=max_card)).collect();
    let mut rows = Vec::with_capacity(cases);
    for _ in 0..cases {
        let mut row = vec![0u32; n];
        for i in 0..n {
            row[i] = if i > 0 && rng.random_bool(0.4) {
                let j = rng.random_range(0..i);
                row[j] % card[i]
            } else {
                rng.random_range(0..card[i])
            };
        }
        rows.push(row);
    }
    let names = (0..n).map(|i| format!("V{i}")).collect();
    DiscreteDataset::new(names, card, rows).unwrap()
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> HpInstance {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    HpInstance::new(n, edges).unwrap()
}

/// Every labelled simple graph on `n` vertices.
pub fn all_graphs(n: usize) -> Vec<HpInstance> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let edges = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e);
            HpInstance::new(n, edges).unwrap()
        })
        .collect()
}

/// Best score over every acyclic parent map with in-degree at most one.
/// With `connected`, only single-root maps count.
pub fn brute_force_branching(w: &WeightMatrix, connected: bool) -> f64 {
    let n = w.len();
    let mut best = f64::NEG_INFINITY;
    let total = (n as u64).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let parent: Vec<Option<usize>> = (0..n)
            .map(|i| {
                let d = (c % n as u64) as usize;
                c /= n as u64;
                // d == i means "no parent"
                if d == i {
                    None
                } else {
                    Some(d)
                }
            })
            .collect();
        if let Ok(b) = Branching::new(parent) {
            if connected && !b.is_tree() {
                continue;
            }
            let score: f64 = b
                .parent()
                .iter()
                .enumerate()
                .map(|(i, p)| match p {
                    None => w.root_weight(i),
                    Some(p) => w.arc_weight(*p, i),
                })
                .sum();
            best = best.max(score);
        }
    }
    best
}

/// Best path score over all `n!` orders, by Heap's algorithm.
pub fn brute_force_path(w: &WeightMatrix) -> f64 {
    let n = w.len();
    let mut a: Vec<usize> = (0..n).collect();
    let score = |a: &[usize]| w.root_weight(a[0]) + a.windows(2).map(|p| w.arc_weight(p[0], p[1])).sum::<f64>();
    let mut best = score(&a);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            best = best.max(score(&a));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, x| acc * x)
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Bayesian local score of `target` given `parents` by exact factorial
/// arithmetic, tallying counts straight from the cases.
pub fn bayes_rational_oracle(data: &DiscreteDataset, target: usize, parents: &[usize]) -> f64 {
    use std::collections::BTreeMap;
    let r = data.cardinalities()[target] as usize;
    let mut table: BTreeMap<Vec<u32>, Vec<u64>> = BTreeMap::new();
    for case in data.cases() {
        let key: Vec<u32> = parents.iter().map(|&p| case[p]).collect();
        table.entry(key).or_insert_with(|| vec![0; r])[case[target] as usize] += 1;
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for hist in table.values() {
        let nc: u64 = hist.iter().sum();
        num *= factorial(r as u64 - 1);
        den *= factorial(r as u64 - 1 + nc);
        for &h in hist {
            num *= factorial(h);
        }
    }
    ln_big(&num) - ln_big(&den)
}

/// `sum N(x, pa) ln(N(x, pa) / N(pa))` by direct tally.
pub fn ml_oracle(data: &DiscreteDataset, target: usize, parents: &[usize]) -> f64 {
    use std::collections::HashMap;
    let mut joint: HashMap<(u32, Vec<u32>), f64> = HashMap::new();
    let mut marg: HashMap<Vec<u32>, f64> = HashMap::new();
    for case in data.cases() {
        let key: Vec<u32> = parents.iter().map(|&p| case[p]).collect();
        *joint.entry((case[target], key.clone())).or_default() += 1.0;
        *marg.entry(key).or_default() += 1.0;
    }
    joint.iter().map(|((_, k), &c)| c * (c / marg[k]).ln()).sum()
}
