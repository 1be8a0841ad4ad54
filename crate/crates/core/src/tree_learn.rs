//! Optimal branchings and spanning trees over in-degree-one local scores.
//!
//! Every structure with in-degree at most one is scored by a
//! [`WeightMatrix`]: roots contribute `root[i] = LocalScore(X_i, {})` and
//! arcs `arc[j][i] = LocalScore(X_i, {X_j})`. The optimal branching is a
//! maximum arborescence on the graph extended with a virtual root whose arc
//! into `i` weighs `root[i]`; it is found with the Chu-Liu/Edmonds cycle
//! contraction algorithm, which does not need symmetric weights (Bayesian
//! local scores are not symmetric in general).

use serde::Serialize;

use crate::dataset::{DiscreteDataset, StatsCache};
use crate::error::Result;
use crate::scoring::{canonical_sum, local_score, Criterion, ScoreValue};
use crate::structures::Branching;

/// Local scores of all empty and single-parent families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightMatrix {
    criterion: Criterion,
    root: Vec<f64>,
    /// `arc[j][i]`: score of `X_i` with parent `X_j`; diagonal is unused.
    arc: Vec<Vec<f64>>,
}

impl WeightMatrix {
    /// Builds a matrix from raw weights. Diagonal entries are ignored.
    pub fn from_raw(criterion: Criterion, root: Vec<f64>, arc: Vec<Vec<f64>>) -> Self {
        assert_eq!(root.len(), arc.len(), "root and arc dimensions differ");
        assert!(arc.iter().all(|row| row.len() == root.len()), "arc matrix is not square");
        WeightMatrix { criterion, root, arc }
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    pub fn len(&self) -> usize {
        self.root.len()
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_empty()
    }

    pub fn root_weight(&self, i: usize) -> f64 {
        self.root[i]
    }

    /// Score of `child` given `parent` as its single parent.
    pub fn arc_weight(&self, parent: usize, child: usize) -> f64 {
        self.arc[parent][child]
    }

    /// Gain from giving `child` the parent `parent` instead of none.
    pub fn delta(&self, parent: usize, child: usize) -> f64 {
        self.arc[parent][child] - self.root[child]
    }

    pub fn is_arc_symmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (i + 1..n).all(|j| self.arc[i][j] == self.arc[j][i]))
    }

    /// Score of the path model with the given order.
    pub fn path_score(&self, order: &[usize]) -> f64 {
        let mut terms = Vec::with_capacity(order.len());
        if let Some(&first) = order.first() {
            terms.push(self.root[first]);
        }
        terms.extend(order.windows(2).map(|w| self.arc[w[0]][w[1]]));
        canonical_sum(&mut terms)
    }

    /// Score of a branching (roots plus arcs).
    pub fn branching_score(&self, b: &Branching) -> f64 {
        let mut terms: Vec<f64> = b
            .parent()
            .iter()
            .enumerate()
            .map(|(i, p)| match *p {
                None => self.root[i],
                Some(p) => self.arc[p][i],
            })
            .collect();
        canonical_sum(&mut terms)
    }
}

pub fn build_weights(criterion: Criterion, data: &DiscreteDataset) -> Result<WeightMatrix> {
    build_weights_cached(criterion, &StatsCache::new(data))
}

/// As [`build_weights`], reusing counts already held in `cache`.
pub fn build_weights_cached(criterion: Criterion, cache: &StatsCache<'_>) -> Result<WeightMatrix> {
    let data = cache.data();
    let n = data.variable_count();
    let card = data.cardinalities();
    let mut root = Vec::with_capacity(n);
    let mut arc = vec![vec![0.0; n]; n];
    for i in 0..n {
        root.push(local_score(criterion, &*cache.get(i, &[])?, card)?.value);
        for j in (0..n).filter(|&j| j != i) {
            arc[j][i] = local_score(criterion, &*cache.get(i, &[j])?, card)?.value;
        }
    }
    Ok(WeightMatrix { criterion, root, arc })
}

/// Maximum-weight spanning arborescence of the dense digraph `w` rooted at
/// `root`, where `w[u][v]` weighs arc `u -> v` and non-finite entries are
/// absent arcs. Returns the parent of every vertex (`None` only for `root`),
/// or `None` when some vertex is unreachable.
///
/// Ties go to the earliest candidate parent.
pub fn max_arborescence(w: &[Vec<f64>], root: usize) -> Option<Vec<Option<usize>>> {
    let n = w.len();
    let mut best_in: Vec<Option<usize>> = vec![None; n];
    for v in (0..n).filter(|&v| v != root) {
        let mut best = f64::NEG_INFINITY;
        for u in (0..n).filter(|&u| u != v) {
            if w[u][v].is_finite() && (best_in[v].is_none() || w[u][v] > best) {
                best = w[u][v];
                best_in[v] = Some(u);
            }
        }
        best_in[v]?;
    }

    let cycle = match find_cycle(&best_in) {
        None => return Some(best_in),
        Some(c) => c,
    };

    // Contract the cycle into a single vertex `c` placed last.
    let mut in_cycle = vec![false; n];
    for &v in &cycle {
        in_cycle[v] = true;
    }
    let mut id = vec![usize::MAX; n];
    let mut orig = Vec::new();
    for v in (0..n).filter(|&v| !in_cycle[v]) {
        id[v] = orig.len();
        orig.push(v);
    }
    let m = orig.len();
    let c = m;
    let mut cw = vec![vec![f64::NEG_INFINITY; m + 1]; m + 1];
    // for an arc u -> c: the cycle vertex it enters
    let mut enter = vec![usize::MAX; m];
    // for an arc c -> v: the cycle vertex it leaves from
    let mut leave = vec![usize::MAX; m];
    for u in 0..n {
        for v in (0..n).filter(|&v| v != u) {
            let x = w[u][v];
            if !x.is_finite() {
                continue;
            }
            match (in_cycle[u], in_cycle[v]) {
                (false, false) => cw[id[u]][id[v]] = x,
                (false, true) => {
                    let cycle_arc = w[best_in[v].unwrap()][v];
                    let gain = x - cycle_arc;
                    if enter[id[u]] == usize::MAX || gain > cw[id[u]][c] {
                        cw[id[u]][c] = gain;
                        enter[id[u]] = v;
                    }
                }
                (true, false) => {
                    if leave[id[v]] == usize::MAX || x > cw[c][id[v]] {
                        cw[c][id[v]] = x;
                        leave[id[v]] = u;
                    }
                }
                (true, true) => {}
            }
        }
    }

    let sub = max_arborescence(&cw, id[root])?;
    let mut parent = best_in;
    for (k, &v) in orig.iter().enumerate() {
        parent[v] = match sub[k] {
            None => None,
            Some(p) if p == c => Some(leave[k]),
            Some(p) => Some(orig[p]),
        };
    }
    let entry_from = sub[c].expect("contracted vertex is never the root");
    parent[enter[entry_from]] = Some(orig[entry_from]);
    Some(parent)
}

/// First cycle in a parent-pointer graph, as its list of vertices.
fn find_cycle(parent: &[Option<usize>]) -> Option<Vec<usize>> {
    let n = parent.len();
    // 0 = unseen, 1 = on the current walk, 2 = done
    let mut state = vec![0u8; n];
    for start in 0..n {
        let mut v = start;
        let mut walk = Vec::new();
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            match parent[v] {
                Some(p) => v = p,
                None => break,
            }
        }
        if state[v] == 1 && parent[v].is_some() {
            let pos = walk.iter().position(|&x| x == v).unwrap();
            return Some(walk[pos..].to_vec());
        }
        for x in walk {
            state[x] = 2;
        }
    }
    None
}

/// Highest-scoring structure with in-degree at most one (a forest).
///
/// An arc is used only when its gain over leaving the child parentless is
/// positive overall; on ties the child stays a root.
pub fn learn_optimal_branching(weights: &WeightMatrix) -> (Branching, ScoreValue) {
    let n = weights.len();
    // vertex 0 is the virtual root, variable i is vertex i + 1
    let mut w = vec![vec![f64::NEG_INFINITY; n + 1]; n + 1];
    for i in 0..n {
        w[0][i + 1] = weights.root[i];
        for j in (0..n).filter(|&j| j != i) {
            w[j + 1][i + 1] = weights.arc[j][i];
        }
    }
    let parent = max_arborescence(&w, 0).expect("virtual root reaches every vertex");
    let parent = parent[1..]
        .iter()
        .map(|p| p.and_then(|p| p.checked_sub(1)))
        .collect();
    let branching = Branching::new(parent).expect("arborescence is acyclic");
    let score = weights.branching_score(&branching);
    (branching, ScoreValue::new(score, weights.criterion))
}

/// Highest-scoring connected structure with in-degree at most one, i.e.
/// a spanning tree with a single root.
pub fn learn_optimal_spanning_tree(weights: &WeightMatrix) -> (Branching, ScoreValue) {
    let n = weights.len();
    if n == 0 {
        return (Branching::empty(0), ScoreValue::new(0.0, weights.criterion));
    }
    let branching = if weights.is_arc_symmetric() {
        symmetric_spanning_tree(weights)
    } else {
        let mut best: Option<(f64, Branching)> = None;
        for r in 0..n {
            let parent = max_arborescence(&weights.arc, r).expect("complete digraph");
            let b = Branching::new(parent).expect("arborescence is acyclic");
            let score = weights.branching_score(&b);
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, b));
            }
        }
        best.unwrap().1
    };
    let score = weights.branching_score(&branching);
    (branching, ScoreValue::new(score, weights.criterion))
}

/// With symmetric arc weights a tree's score is its root weight plus the
/// sum of its edge weights whichever way the edges point, so a maximum
/// spanning tree (Prim) rooted at the best root weight is optimal.
fn symmetric_spanning_tree(weights: &WeightMatrix) -> Branching {
    let n = weights.len();
    let root = (0..n).fold(0, |best, i| if weights.root[i] > weights.root[best] { i } else { best });
    let mut parent = vec![None; n];
    let mut in_tree = vec![false; n];
    let mut link: Vec<Option<(f64, usize)>> = vec![None; n];
    in_tree[root] = true;
    for v in (0..n).filter(|&v| v != root) {
        link[v] = Some((weights.arc[root][v], root));
    }
    for _ in 1..n {
        let mut pick: Option<usize> = None;
        for v in (0..n).filter(|&v| !in_tree[v]) {
            if pick.is_none_or(|p| link[v].unwrap().0 > link[p].unwrap().0) {
                pick = Some(v);
            }
        }
        let v = pick.unwrap();
        in_tree[v] = true;
        parent[v] = Some(link[v].unwrap().1);
        for u in (0..n).filter(|&u| !in_tree[u]) {
            let x = weights.arc[v][u];
            if x > link[u].unwrap().0 {
                link[u] = Some((x, v));
            }
        }
    }
    Branching::new(parent).expect("Prim builds a tree")
}
