//! Minimal labelled trees: the limb threshold `S`, the catalog of trees with
//! at most `S` pairwise isomorphic limbs per vertex, and the lookup tables
//! built over it.
//!
//! A vertex label is a bit vector over its ancestors, nearest first: bit `i`
//! set means an edge to the ancestor at distance `i + 1`.

mod cache;
mod catalog;
mod threshold;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DynamicGraph, VertexId};
use crate::mso::MsoError;
use crate::static_core::LabelledTree;

pub use cache::{cache_key, CatalogCache};
pub use catalog::{
    build_root_table, build_sat_table, enumerate_minimal_trees, enumerate_minimal_trees_with,
    CatalogConfig, MinimalTreeCatalog, Placement, RootEntry, DEFAULT_CATALOG_CAP,
};
pub use threshold::{
    compute_limb_threshold, verify_limb_threshold, EnumerationBound, LimbThreshold, ThresholdConfig,
};

/// Ancestor-bit label of one vertex.
pub type Bits = u8;

/// Deepest decomposition supported by [`Bits`].
pub const MAX_DEPTH: usize = Bits::BITS as usize + 1;

pub type BitTree = LabelledTree<Bits>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinimalError {
    #[error("node {node} at depth {depth} has label {bits:#b} referring to missing ancestors")]
    InconsistentLabel {
        node: usize,
        depth: usize,
        bits: Bits,
    },
    #[error("catalog would exceed {cap} trees")]
    CatalogBudgetExceeded { cap: usize },
    #[error("no limb threshold validated up to {cap}")]
    ValidationBudgetExceeded { cap: usize },
    #[error("depth {0} is outside 1..={MAX_DEPTH}")]
    InvalidDepth(usize),
    #[error("label {bits:#b} does not fit depth bound {depth}")]
    LabelTooWide { bits: Bits, depth: usize },
    #[error("formula mentions constants where none are allowed")]
    UnexpectedConstants,
    #[error(transparent)]
    Mso(#[from] MsoError),
    #[error("catalog cache: {0}")]
    Cache(String),
}

/// The level-0 alphabet: the ancestor-bit vectors allowed for a decomposition
/// of depth at most `depth`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelAlphabet {
    pub depth: usize,
    labels: Vec<Bits>,
}

impl LabelAlphabet {
    /// All `2^(depth-1)` vectors.
    pub fn full(depth: usize) -> Result<Self, MinimalError> {
        check_depth(depth)?;
        let labels = (0..1u16 << (depth - 1)).map(|b| b as Bits).collect();
        Ok(Self { depth, labels })
    }

    pub fn new(depth: usize, mut labels: Vec<Bits>) -> Result<Self, MinimalError> {
        check_depth(depth)?;
        for &bits in &labels {
            if (bits as u16) >> (depth - 1) != 0 {
                return Err(MinimalError::LabelTooWide { bits, depth });
            }
        }
        labels.sort_unstable();
        labels.dedup();
        Ok(Self { depth, labels })
    }

    pub fn labels(&self) -> &[Bits] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels usable by a vertex at absolute depth `depth` (root = 1).
    pub fn at_depth(&self, depth: usize) -> impl Iterator<Item = Bits> + '_ {
        self.labels
            .iter()
            .copied()
            .filter(move |&b| fits_depth(b, depth))
    }
}

fn check_depth(depth: usize) -> Result<(), MinimalError> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(MinimalError::InvalidDepth(depth));
    }
    Ok(())
}

/// Whether a vertex at depth `depth` has an ancestor for every set bit.
pub fn fits_depth(bits: Bits, depth: usize) -> bool {
    depth > Bits::BITS as usize || (bits as u16) >> (depth - 1) == 0
}

/// The graph encoded by a bit-labelled tree. Node `i` becomes the `i`-th
/// returned vertex.
pub fn decode(tree: &BitTree) -> Result<(DynamicGraph, Vec<VertexId>), MinimalError> {
    let (mut g, ids) = DynamicGraph::with_vertices(tree.len());
    let mut depth = vec![0usize; tree.len()];
    for i in 0..tree.len() {
        depth[i] = match tree.parent(i) {
            None => 1,
            Some(p) => depth[p] + 1,
        };
        let bits = *tree.label(i);
        if !fits_depth(bits, depth[i]) {
            return Err(MinimalError::InconsistentLabel {
                node: i,
                depth: depth[i],
                bits,
            });
        }
        let mut anc = tree.parent(i);
        let mut k = 0;
        while let Some(a) = anc {
            if bits >> k & 1 == 1 {
                g.set_edge(ids[i], ids[a], true)
                    .expect("distinct tree nodes");
            }
            anc = tree.parent(a);
            k += 1;
        }
    }
    Ok((g, ids))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::static_core::{closure, RootedForest};
    use std::collections::BTreeMap;

    fn chain(labels: &[Bits]) -> BitTree {
        let mut t = BitTree::leaf(labels[0]);
        for (i, &l) in labels.iter().enumerate().skip(1) {
            t.add_child(i - 1, l);
        }
        t
    }

    #[test]
    fn decode_chain_and_star() {
        let (g, _) = decode(&chain(&[0, 1, 0b11])).unwrap();
        assert_eq!(g.edge_count(), 3);
        let (g, _) = decode(&chain(&[0, 0, 0])).unwrap();
        assert_eq!(g.edge_count(), 0);
        let mut star = BitTree::leaf(0);
        for _ in 0..4 {
            star.add_child(0, 1);
        }
        let (g, ids) = decode(&star).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.degree(ids[0]), 4);
    }

    #[test]
    fn decode_rejects_missing_ancestor() {
        assert_eq!(
            decode(&chain(&[0, 0b10])),
            Err(MinimalError::InconsistentLabel {
                node: 1,
                depth: 2,
                bits: 0b10
            })
        );
        assert!(decode(&BitTree::leaf(1)).is_err());
    }

    #[test]
    fn decoded_graph_lies_in_closure() {
        let t = chain(&[0, 1, 0b10, 0b101]);
        let (g, ids) = decode(&t).unwrap();
        let parents: BTreeMap<_, _> = (0..t.len())
            .map(|i| (ids[i], t.parent(i).map(|p| ids[p])))
            .collect();
        let f = RootedForest::from_parents(parents, 4).unwrap();
        let cl = closure(&f);
        for (u, v) in g.edges() {
            assert!(cl.contains(&(u, v)) || cl.contains(&(v, u)));
        }
    }

    #[test]
    fn alphabet() {
        assert_eq!(LabelAlphabet::full(3).unwrap().labels(), &[0, 1, 2, 3]);
        assert_eq!(LabelAlphabet::full(1).unwrap().labels(), &[0]);
        let a = LabelAlphabet::full(3).unwrap();
        assert_eq!(a.at_depth(2).collect::<Vec<_>>(), vec![0, 1]);
        assert!(LabelAlphabet::new(2, vec![2]).is_err());
        assert!(LabelAlphabet::full(0).is_err());
    }
}
