//! Encoding of Hamiltonian path as optimal path learning.
//!
//! Every vertex becomes a ternary variable and every vertex pair `i < j`
//! contributes eight cases in which all other variables are 0. The pair's
//! values follow one of two blocks:
//!
//! | `(X_i, X_j)` | edge | non-edge |
//! |--------------|------|----------|
//! | `(1, 1)`     | 3    | 2        |
//! | `(1, 2)`     | 1    | 2        |
//! | `(2, 1)`     | 1    | 2        |
//! | `(2, 2)`     | 3    | 2        |
//!
//! All variables then share one empty-parent score `gamma`, and a
//! single-parent score is `beta` on edges and a strictly smaller `alpha` on
//! non-edges, for ML, MDL and Bayes alike. A path model reaches
//! `k = gamma + (n - 1) * beta` exactly when its order is a Hamiltonian path
//! of the graph; any other order loses at least `beta - alpha`.

use serde::Serialize;

use crate::dataset::{DiscreteDataset, StatsCache};
use crate::error::{Error, Result};
use crate::path_learn::solve_path_exact;
use crate::scoring::{local_score, Criterion};
use crate::structures::{is_hamiltonian_path, HpInstance};
use crate::tree_learn::build_weights_cached;

const EDGE_BLOCK: [(u32, u32); 8] = [(1, 1), (1, 1), (1, 1), (1, 2), (2, 1), (2, 2), (2, 2), (2, 2)];
const NON_EDGE_BLOCK: [(u32, u32); 8] = [(1, 1), (1, 1), (1, 2), (1, 2), (2, 1), (2, 1), (2, 2), (2, 2)];

/// Relative tolerance used when comparing measured scores.
pub const SCORE_TOLERANCE: f64 = 1e-9;

fn tol(x: f64) -> f64 {
    SCORE_TOLERANCE * x.abs().max(1.0)
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= tol(a.abs().max(b.abs()))
}

/// Builds the `4n(n - 1)`-case ternary dataset for `g`. Blocks appear in
/// lexicographic pair order with a fixed case order inside each block.
pub fn generate_reduction(g: &HpInstance) -> Result<DiscreteDataset> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::InstanceTooSmall(format!("reduction needs at least 2 vertices, got {n}")));
    }
    let mut cases = Vec::with_capacity(4 * n * (n - 1));
    for i in 0..n {
        for j in i + 1..n {
            let block = if g.has_edge(i, j) { &EDGE_BLOCK } else { &NON_EDGE_BLOCK };
            for &(a, b) in block {
                let mut case = vec![0; n];
                case[i] = a;
                case[j] = b;
                cases.push(case);
            }
        }
    }
    let names = (0..n).map(|i| format!("X{i}")).collect();
    DiscreteDataset::new(names, vec![3; n], cases)
}

/// Pairwise count table the construction yields for any pair of variables
/// in an `n`-vertex instance, indexed `[value of X_i][value of X_j]`.
pub fn expected_pair_table(n: usize, edge: bool) -> [[u64; 3]; 3] {
    let n = n as u64;
    // 4(n^2 - 5n + 6) = 4(n - 2)(n - 3), zero for n = 2 and n = 3
    let corner = 4 * (n - 2) * n.saturating_sub(3);
    let border = 4 * (n - 2);
    let (d, o) = if edge { (3, 1) } else { (2, 2) };
    [[corner, border, border], [border, d, o], [border, o, d]]
}

/// Joint counts of `(X_i, X_j)` over all cases.
pub fn pair_table(data: &DiscreteDataset, i: usize, j: usize) -> [[u64; 3]; 3] {
    let mut t = [[0u64; 3]; 3];
    for case in data.cases() {
        let (a, b) = (case[i] as usize, case[j] as usize);
        if a < 3 && b < 3 {
            t[a][b] += 1;
        }
    }
    t
}

/// True iff `data` has `4n(n - 1)` cases, ternary variables and every
/// pairwise table equal to [`expected_pair_table`] for its pair type.
pub fn count_tables_match(data: &DiscreteDataset, g: &HpInstance) -> bool {
    let n = g.vertex_count();
    if data.variable_count() != n || n < 2 || data.case_count() != 4 * n * (n - 1) {
        return false;
    }
    if data.cardinalities().iter().any(|&c| c != 3) {
        return false;
    }
    (0..n).all(|i| (i + 1..n).all(|j| pair_table(data, i, j) == expected_pair_table(n, g.has_edge(i, j))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionConstants {
    pub criterion: Criterion,
    /// Empty-parent score, measured on `X_0`.
    pub gamma: f64,
    /// Single-parent score on a non-edge pair; absent for complete graphs.
    pub alpha: Option<f64>,
    /// Single-parent score on an edge pair; absent for edgeless graphs.
    pub beta: Option<f64>,
    /// `gamma + (n - 1) * beta`.
    pub k: Option<f64>,
}

impl ReductionConstants {
    /// `beta - alpha` when both are defined.
    pub fn separation(&self) -> Option<f64> {
        Some(self.beta? - self.alpha?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Conditions {
    /// All cardinalities equal.
    pub i: bool,
    /// All empty-parent scores equal.
    pub ii: bool,
    /// Single-parent scores take at most two values, `alpha < beta`.
    pub iii: bool,
    /// `LocalScore(X_i, {X_j}) = LocalScore(X_j, {X_i})`.
    pub iv: bool,
    /// Single-parent score equals `beta` exactly on edges.
    pub v: bool,
}

impl Conditions {
    pub fn all(&self) -> bool {
        self.i && self.ii && self.iii && self.iv && self.v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    #[serde(flatten)]
    pub constants: ReductionConstants,
    /// `beta - alpha`.
    pub separation: Option<f64>,
    pub conditions: Conditions,
    /// True when only one pair type exists, making (iii) and (v) hold
    /// trivially.
    pub vacuous: bool,
    /// Distinct single-parent scores observed (up to tolerance), ascending.
    pub pairwise_values: Vec<f64>,
    pub count_tables: bool,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.conditions.all()
    }
}

pub fn verify_reduction(data: &DiscreteDataset, g: &HpInstance, criterion: Criterion) -> Result<ReductionReport> {
    verify_reduction_cached(&StatsCache::new(data), g, criterion)
}

/// Measures every empty-parent and single-parent local score and checks
/// conditions (i)-(v). Failed conditions are reported, not raised.
pub fn verify_reduction_cached(cache: &StatsCache<'_>, g: &HpInstance, criterion: Criterion) -> Result<ReductionReport> {
    let data = cache.data();
    let n = g.vertex_count();
    if data.variable_count() != n {
        return Err(Error::InvalidQuery(format!(
            "dataset has {} variables, graph has {n} vertices",
            data.variable_count()
        )));
    }
    if n < 2 {
        return Err(Error::InstanceTooSmall(format!("reduction needs at least 2 vertices, got {n}")));
    }
    let card = data.cardinalities();
    let score = |target: usize, parents: &[usize]| -> Result<f64> {
        Ok(local_score(criterion, &*cache.get(target, parents)?, card)?.value)
    };

    let roots = (0..n).map(|i| score(i, &[])).collect::<Result<Vec<_>>>()?;
    // pair[i][j] = LocalScore(X_j, {X_i})
    let mut pair = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            pair[i][j] = score(j, &[i])?;
        }
    }

    let gamma = roots[0];
    let first_edge = g.edges().next();
    let first_non_edge = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .find(|&(i, j)| !g.has_edge(i, j));
    let beta = first_edge.map(|(i, j)| pair[i][j]);
    let alpha = first_non_edge.map(|(i, j)| pair[i][j]);
    let k = beta.map(|b| gamma + (n - 1) as f64 * b);

    let mut values: Vec<f64> = Vec::new();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let x = pair[i][j];
            if !values.iter().any(|&v| approx_eq(v, x)) {
                values.push(x);
            }
        }
    }
    values.sort_by(f64::total_cmp);

    let vacuous = alpha.is_none() || beta.is_none();
    let i = card.iter().all(|&c| c == card[0]);
    let ii = roots.iter().all(|&r| approx_eq(r, gamma));
    let iii = values.len() <= 2
        && match (alpha, beta) {
            (Some(a), Some(b)) => a < b && !approx_eq(a, b),
            _ => values.len() == 1,
        };
    let iv = (0..n).all(|i| (i + 1..n).all(|j| approx_eq(pair[i][j], pair[j][i])));
    let v = match beta {
        None => true,
        Some(b) => (0..n).all(|i| {
            (0..n)
                .filter(|&j| j != i)
                .all(|j| approx_eq(pair[i][j], b) == g.has_edge(i, j))
        }),
    };

    let constants = ReductionConstants {
        criterion,
        gamma,
        alpha,
        beta,
        k,
    };
    Ok(ReductionReport {
        separation: constants.separation(),
        constants,
        conditions: Conditions { i, ii, iii, iv, v },
        vacuous,
        pairwise_values: values,
        count_tables: count_tables_match(data, g),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Yes,
    No,
}

/// Answer to the Hamiltonian-path question obtained through the optimal
/// path model of the reduction dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpDecision {
    #[serde(flatten)]
    pub report: ReductionReport,
    pub decision: Decision,
    /// Optimal path order; a Hamiltonian path when the answer is yes.
    pub witness: Option<Vec<usize>>,
    pub best_score: Option<f64>,
    /// `k - best_score`: 0 up to rounding on yes, at least `beta - alpha`
    /// on no.
    pub margin: Option<f64>,
}

impl HpDecision {
    pub fn is_yes(&self) -> bool {
        self.decision == Decision::Yes
    }
}

pub fn decide_hp(g: &HpInstance, criterion: Criterion, exact_limit: usize) -> Result<HpDecision> {
    let mut all = decide_hp_all(g, &[criterion], exact_limit)?;
    Ok(all.remove(0))
}

/// [`decide_hp`] for several criteria over one generated dataset.
///
/// The answer is structural: yes iff every consecutive pair of the optimal
/// order is an edge. The score is then cross-checked against `k`; a
/// disagreement is an [`Error::Inconsistent`].
pub fn decide_hp_all(g: &HpInstance, criteria: &[Criterion], exact_limit: usize) -> Result<Vec<HpDecision>> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::InstanceTooSmall(format!("reduction needs at least 2 vertices, got {n}")));
    }
    if n > exact_limit {
        return Err(Error::LimitExceeded {
            what: "exact path search (use the heuristic instead)",
            n,
            limit: exact_limit,
        });
    }
    let data = generate_reduction(g)?;
    let cache = StatsCache::new(&data);
    criteria
        .iter()
        .map(|&criterion| {
            let report = verify_reduction_cached(&cache, g, criterion)?;
            if g.edge_count() == 0 {
                return Ok(HpDecision {
                    report,
                    decision: Decision::No,
                    witness: None,
                    best_score: None,
                    margin: None,
                });
            }
            let weights = build_weights_cached(criterion, &cache)?;
            let result = solve_path_exact(&weights, exact_limit)?;
            let order = result.best_path.order().to_vec();
            let best = result.best_score.value;
            let k = report.constants.k.expect("beta is defined when edges exist");
            let yes = is_hamiltonian_path(g, &order);
            let consistent = if yes {
                (best - k).abs() <= tol(k)
            } else {
                best < k - tol(k)
            };
            if !consistent {
                return Err(Error::Inconsistent(format!(
                    "{criterion}: structural answer {} but best score {best} vs k = {k}",
                    if yes { "yes" } else { "no" }
                )));
            }
            Ok(HpDecision {
                report,
                decision: if yes { Decision::Yes } else { Decision::No },
                witness: Some(order),
                best_score: Some(best),
                margin: Some(k - best),
            })
        })
        .collect()
}
