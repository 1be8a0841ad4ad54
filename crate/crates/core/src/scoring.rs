//! Decomposable local scores: maximized log-likelihood (ML), MDL and the
//! Cooper-Herskovits Bayesian score. All values are in nats and larger is
//! better.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dataset::{compute_stats, DiscreteDataset, StatsCache, SufficientStats};
use crate::error::{Error, Result};
use crate::structures::ParentMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Ml,
    Mdl,
    Bayes,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::Ml, Criterion::Mdl, Criterion::Bayes];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Ml => "ml",
            Criterion::Mdl => "mdl",
            Criterion::Bayes => "bayes",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ml" => Ok(Criterion::Ml),
            "mdl" => Ok(Criterion::Mdl),
            "bayes" => Ok(Criterion::Bayes),
            other => Err(format!("unknown criterion {other:?} (expected ml, mdl or bayes)")),
        }
    }
}

/// A local or total score tagged with the criterion that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreValue {
    pub value: f64,
    pub criterion: Criterion,
}

impl ScoreValue {
    pub fn new(value: f64, criterion: Criterion) -> Self {
        ScoreValue { value, criterion }
    }
}

/// Sums `terms` in ascending order so that equal multisets of terms give
/// bit-identical totals regardless of the order they were produced in.
pub fn canonical_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// `sum_{x, pa} N(x, pa) ln(N(x, pa) / N(pa))`, i.e. `-N * H(X | pa(X))`.
pub fn local_score_ml(stats: &SufficientStats) -> ScoreValue {
    let mut total = 0.0;
    for (_, hist) in stats.configurations() {
        let parent: u64 = hist.iter().sum();
        if parent == 0 {
            continue;
        }
        let parent = parent as f64;
        for &count in hist.iter().filter(|&&c| c > 0) {
            let count = count as f64;
            total += count * (count / parent).ln();
        }
    }
    ScoreValue::new(total, Criterion::Ml)
}

/// `(prod_{p in parents} #(X_p)) * (#(X_i) - 1) * ln(N) / 2`.
pub fn mdl_penalty(stats: &SufficientStats, cardinalities: &[u32]) -> Result<f64> {
    let n = stats.case_count();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let parent_configs: f64 = stats.parents().iter().map(|&p| cardinalities[p] as f64).product();
    let free = (cardinalities[stats.target()] - 1) as f64;
    Ok(parent_configs * free * (n as f64).ln() / 2.0)
}

pub fn local_score_mdl(stats: &SufficientStats, cardinalities: &[u32]) -> Result<ScoreValue> {
    let penalty = mdl_penalty(stats, cardinalities)?;
    Ok(ScoreValue::new(local_score_ml(stats).value - penalty, Criterion::Mdl))
}

/// Log marginal likelihood under uniform Dirichlet parameter priors:
/// `sum_c [lnG(r) - lnG(r + N(c)) + sum_v lnG(N(v, c) + 1)]` with
/// `r = #(X_i)`. The structure prior is uniform and contributes a constant,
/// which is dropped.
pub fn local_score_bayes(stats: &SufficientStats, cardinalities: &[u32]) -> ScoreValue {
    let r = cardinalities[stats.target()] as f64;
    let ln_gamma_r = ln_gamma(r);
    let mut total = 0.0;
    for (_, hist) in stats.configurations() {
        let parent: u64 = hist.iter().sum();
        if parent == 0 {
            continue;
        }
        let mut term = ln_gamma_r - ln_gamma(r + parent as f64);
        for &count in hist.iter().filter(|&&c| c > 1) {
            term += ln_gamma(count as f64 + 1.0);
        }
        total += term;
    }
    ScoreValue::new(total, Criterion::Bayes)
}

pub fn local_score(criterion: Criterion, stats: &SufficientStats, cardinalities: &[u32]) -> Result<ScoreValue> {
    match criterion {
        Criterion::Ml => Ok(local_score_ml(stats)),
        Criterion::Mdl => local_score_mdl(stats, cardinalities),
        Criterion::Bayes => Ok(local_score_bayes(stats, cardinalities)),
    }
}

/// Local score of every variable under `structure`, in variable order.
pub fn structure_local_scores(
    criterion: Criterion,
    cache: &StatsCache<'_>,
    structure: &ParentMap,
) -> Result<Vec<ScoreValue>> {
    let data = cache.data();
    if structure.len() != data.variable_count() {
        return Err(Error::InvalidStructure(format!(
            "structure covers {} variables, dataset has {}",
            structure.len(),
            data.variable_count()
        )));
    }
    structure
        .iter()
        .enumerate()
        .map(|(i, parents)| {
            if parents.contains(&i) {
                return Err(Error::InvalidStructure(format!("variable {i} is its own parent")));
            }
            let stats = cache.get(i, parents).map_err(|e| match e {
                Error::InvalidQuery(m) => Error::InvalidStructure(m),
                e => e,
            })?;
            local_score(criterion, &stats, data.cardinalities())
        })
        .collect()
}

/// `Score(G, D)`: the sum of the local scores of `structure`. Parent sets
/// need not form a DAG.
pub fn score_structure(criterion: Criterion, data: &DiscreteDataset, structure: &ParentMap) -> Result<ScoreValue> {
    let cache = StatsCache::new(data);
    let mut terms: Vec<f64> = structure_local_scores(criterion, &cache, structure)?
        .into_iter()
        .map(|s| s.value)
        .collect();
    Ok(ScoreValue::new(canonical_sum(&mut terms), criterion))
}

/// Convenience wrapper computing stats and the local score in one go.
pub fn local_score_of(criterion: Criterion, data: &DiscreteDataset, target: usize, parents: &[usize]) -> Result<ScoreValue> {
    let stats = compute_stats(data, target, parents)?;
    local_score(criterion, &stats, data.cardinalities())
}
