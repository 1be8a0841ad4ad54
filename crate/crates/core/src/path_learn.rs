//! Optimal path models: exact subset DP, exhaustive enumeration and a
//! local-search heuristic. Every result carries the optimal branching score
//! as an upper bound, since a path is a particular branching.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scoring::ScoreValue;
use crate::structures::PathStructure;
use crate::tree_learn::{learn_optimal_branching, WeightMatrix};

/// Largest `n` the DP accepts by default; it holds `2^n * n` scores.
pub const DEFAULT_EXACT_LIMIT: usize = 20;
pub const BRUTE_FORCE_LIMIT: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSearchResult {
    pub best_path: PathStructure,
    pub best_score: ScoreValue,
    /// Optimal branching score.
    pub upper_bound: ScoreValue,
    /// `upper_bound - best_score`, never negative.
    pub gap: f64,
    pub exact: bool,
}

impl PathSearchResult {
    fn new(weights: &WeightMatrix, order: Vec<usize>, exact: bool) -> Self {
        let criterion = weights.criterion();
        let best = weights.path_score(&order);
        let (_, upper) = learn_optimal_branching(weights);
        PathSearchResult {
            best_path: PathStructure::new(order).expect("solvers emit permutations"),
            best_score: ScoreValue::new(best, criterion),
            upper_bound: upper,
            gap: (upper.value - best).max(0.0),
            exact,
        }
    }
}

fn require_nonempty(weights: &WeightMatrix) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InstanceTooSmall("path search needs at least one variable".into()));
    }
    Ok(())
}

/// Exact optimum by dynamic programming over (visited set, last vertex):
/// `best[S][v] = max_u best[S - v][u] + arc[u][v]`, `best[{v}][v] = root[v]`.
///
/// Ties prefer the smaller vertex index, both for the final vertex and
/// during backtracking, so the witness is deterministic.
pub fn solve_path_exact(weights: &WeightMatrix, limit: usize) -> Result<PathSearchResult> {
    require_nonempty(weights)?;
    let n = weights.len();
    if n > limit || n >= usize::BITS as usize {
        return Err(Error::LimitExceeded {
            what: "exact path search (use the heuristic instead)",
            n,
            limit,
        });
    }
    let full = (1usize << n) - 1;
    let mut best = vec![f64::NEG_INFINITY; (full + 1) * n];
    let cell = |mask: usize, v: usize| mask * n + v;

    for v in 0..n {
        best[cell(1 << v, v)] = weights.root_weight(v);
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        for v in (0..n).filter(|&v| mask & (1 << v) != 0) {
            let prev = mask ^ (1 << v);
            let mut top = f64::NEG_INFINITY;
            for u in (0..n).filter(|&u| prev & (1 << u) != 0) {
                let x = best[cell(prev, u)] + weights.arc_weight(u, v);
                if x > top {
                    top = x;
                }
            }
            best[cell(mask, v)] = top;
        }
    }

    let mut last = 0;
    for v in 1..n {
        if best[cell(full, v)] > best[cell(full, last)] {
            last = v;
        }
    }
    let mut order = vec![last];
    let mut mask = full;
    let mut v = last;
    while mask.count_ones() > 1 {
        let prev = mask ^ (1 << v);
        let target = best[cell(mask, v)];
        let u = (0..n)
            .filter(|&u| prev & (1 << u) != 0)
            .find(|&u| best[cell(prev, u)] + weights.arc_weight(u, v) == target)
            .expect("some predecessor attains the stored maximum");
        order.push(u);
        mask = prev;
        v = u;
    }
    order.reverse();
    Ok(PathSearchResult::new(weights, order, true))
}

/// Scores all `n!` orders. Testing oracle.
pub fn solve_path_brute(weights: &WeightMatrix) -> Result<PathSearchResult> {
    require_nonempty(weights)?;
    let n = weights.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::LimitExceeded {
            what: "brute-force path search",
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut best_order = order.clone();
    let mut best = weights.path_score(&order);
    while next_permutation(&mut order) {
        let s = weights.path_score(&order);
        if s > best {
            best = s;
            best_order.clone_from(&order);
        }
    }
    Ok(PathSearchResult::new(weights, best_order, true))
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).unwrap();
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Greedy construction from every start vertex plus `restarts` random
/// orders, each polished by first-improvement local search over segment
/// reversal (directed 2-opt) and single-vertex relocation. Deterministic for
/// a given `seed`. No optimality guarantee.
pub fn solve_path_heuristic(weights: &WeightMatrix, restarts: usize, seed: u64) -> Result<PathSearchResult> {
    require_nonempty(weights)?;
    let n = weights.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut starts: Vec<Vec<usize>> = (0..n).map(|s| greedy_from(weights, s)).collect();
    for _ in 0..restarts {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        starts.push(order);
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for mut order in starts {
        let score = local_search(weights, &mut order);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, order));
        }
    }
    let (_, order) = best.unwrap();
    Ok(PathSearchResult::new(weights, order, false))
}

/// Grows a path from `start`, at each step appending or prepending the
/// vertex with the largest score gain.
fn greedy_from(weights: &WeightMatrix, start: usize) -> Vec<usize> {
    let n = weights.len();
    let mut used = vec![false; n];
    used[start] = true;
    let mut order = std::collections::VecDeque::from([start]);
    while order.len() < n {
        let first = order[0];
        let last = order[order.len() - 1];
        let mut pick: Option<(f64, usize, bool)> = None;
        for v in (0..n).filter(|&v| !used[v]) {
            let append = weights.arc_weight(last, v);
            let prepend = weights.root_weight(v) + weights.arc_weight(v, first) - weights.root_weight(first);
            for (gain, front) in [(append, false), (prepend, true)] {
                if pick.is_none_or(|(g, _, _)| gain > g) {
                    pick = Some((gain, v, front));
                }
            }
        }
        let (_, v, front) = pick.unwrap();
        used[v] = true;
        if front {
            order.push_front(v);
        } else {
            order.push_back(v);
        }
    }
    order.into()
}

fn raw_path_score(weights: &WeightMatrix, order: &[usize]) -> f64 {
    weights.root_weight(order[0]) + order.windows(2).map(|w| weights.arc_weight(w[0], w[1])).sum::<f64>()
}

/// Applies improving moves until none is left; returns the final score.
fn local_search(weights: &WeightMatrix, order: &mut [usize]) -> f64 {
    let n = order.len();
    let mut current = raw_path_score(weights, order);
    let mut trial = order.to_vec();
    'improve: loop {
        let eps = 1e-12 * current.abs().max(1.0);
        for i in 0..n {
            for j in i + 1..n {
                trial.copy_from_slice(order);
                trial[i..=j].reverse();
                let s = raw_path_score(weights, &trial);
                if s > current + eps {
                    order.copy_from_slice(&trial);
                    current = s;
                    continue 'improve;
                }
            }
        }
        for i in 0..n {
            for k in (0..n).filter(|&k| k != i) {
                trial.copy_from_slice(order);
                let v = trial.remove(i);
                trial.insert(k, v);
                let s = raw_path_score(weights, &trial);
                if s > current + eps {
                    order.copy_from_slice(&trial);
                    current = s;
                    continue 'improve;
                }
            }
        }
        return current;
    }
}
