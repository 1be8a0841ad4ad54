//! Structure learning for discrete directed graphical models whose parent
//! sets have at most one member: optimal branchings, spanning trees and
//! paths under the maximum-likelihood, MDL and Cooper-Herskovits Bayesian
//! scores.
//!
//! The [`reduction`] module encodes an undirected graph as a ternary dataset
//! whose optimal path model exists with score `gamma + (n - 1) * beta` exactly
//! when the graph has a Hamiltonian path, which makes optimal path learning
//! at least as hard as Hamiltonian path. Optimal branchings on the other hand
//! are polynomial ([`tree_learn`]) and bound every path score from above.
//!
//! For undirected path models the local scores coincide with the directed
//! ones, so everything here applies to them unchanged.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod path_learn;
pub mod reduction;
pub mod scoring;
pub mod structures;
pub mod tree_learn;

pub use dataset::{DiscreteDataset, StatsCache, SufficientStats};
pub use error::{Error, Result};
pub use path_learn::{PathSearchResult, DEFAULT_EXACT_LIMIT};
pub use reduction::{HpDecision, ReductionConstants, ReductionReport};
pub use scoring::{Criterion, ScoreValue};
pub use structures::{Branching, HpInstance, ParentMap, PathStructure};
pub use tree_learn::WeightMatrix;
