//! Exact static tree-depth machinery: forests, closures, the elimination
//! recursion, and canonical keys of labelled rooted trees.

mod canon;
mod forest;
mod small;
mod treedepth;

use thiserror::Error;

use crate::graph::VertexId;

pub use canon::{canonical_key, CanonicalKey, KeyLabel, LabelledTree, TreeNode};
pub use forest::{closure, is_valid_decomposition, RootedForest};
pub use small::{connected_graphs_up_to_iso, graphs_up_to_iso, MAX_ENUMERATED_ORDER};
pub use treedepth::{
    admissible_roots, admits_root, optimal_decomposition, rooted_decomposition, tree_depth,
    MAX_EXACT_VERTICES,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StaticError {
    #[error("forest and graph have different vertex sets")]
    VertexSetMismatch,
    #[error("parent links at vertex {0} do not form a forest")]
    MalformedForest(VertexId),
}
