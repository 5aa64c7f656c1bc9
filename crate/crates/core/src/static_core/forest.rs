use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::StaticError;
use crate::graph::{DynamicGraph, VertexId};

/// Explicit rooted forest given by a parent map. Depth counts vertices on the
/// longest root-to-leaf path, so a lone vertex has depth 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedForest {
    parent: BTreeMap<VertexId, Option<VertexId>>,
    roots: Vec<VertexId>,
    pub depth_bound: usize,
}

impl RootedForest {
    /// Builds a forest from a parent map. Fails if a parent is missing from the
    /// map or the parent links contain a cycle.
    pub fn from_parents(
        parent: BTreeMap<VertexId, Option<VertexId>>,
        depth_bound: usize,
    ) -> Result<Self, StaticError> {
        for (&v, p) in &parent {
            if let Some(p) = p {
                if !parent.contains_key(p) {
                    return Err(StaticError::MalformedForest(v));
                }
            }
        }
        // Every walk must reach a root within |V| steps.
        let limit = parent.len();
        for &v in parent.keys() {
            let mut cur = v;
            let mut steps = 0;
            while let Some(Some(p)) = parent.get(&cur) {
                cur = *p;
                steps += 1;
                if steps > limit {
                    return Err(StaticError::MalformedForest(v));
                }
            }
        }
        let roots = parent
            .iter()
            .filter(|(_, p)| p.is_none())
            .map(|(&v, _)| v)
            .collect();
        Ok(Self {
            parent,
            roots,
            depth_bound,
        })
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent.get(&v).copied().flatten()
    }

    pub fn roots(&self) -> &[VertexId] {
        &self.roots
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.parent.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parents(&self) -> &BTreeMap<VertexId, Option<VertexId>> {
        &self.parent
    }

    /// Depth of `v` counted in vertices: roots sit at depth 1.
    pub fn depth_of(&self, v: VertexId) -> usize {
        let mut d = 1;
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            d += 1;
            cur = p;
        }
        d
    }

    /// Maximum vertex depth; 0 for the empty forest.
    pub fn depth(&self) -> usize {
        self.vertices().map(|v| self.depth_of(v)).max().unwrap_or(0)
    }

    /// Whether `a` is a strict ancestor of `d`.
    pub fn is_ancestor(&self, a: VertexId, d: VertexId) -> bool {
        let mut cur = d;
        while let Some(p) = self.parent(cur) {
            if p == a {
                return true;
            }
            cur = p;
        }
        false
    }

    pub fn children(&self) -> BTreeMap<VertexId, Vec<VertexId>> {
        let mut out: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for (&v, p) in &self.parent {
            if let Some(p) = p {
                out.entry(*p).or_default().push(v);
            }
        }
        out
    }
}

/// All (strict ancestor, descendant) pairs of the forest.
pub fn closure(forest: &RootedForest) -> BTreeSet<(VertexId, VertexId)> {
    let mut out = BTreeSet::new();
    for v in forest.vertices() {
        let mut cur = v;
        while let Some(p) = forest.parent(cur) {
            out.insert((p, v));
            cur = p;
        }
    }
    out
}

/// True iff the forest has depth at most `depth` and every edge of the graph
/// joins an ancestor-descendant pair.
pub fn is_valid_decomposition(
    graph: &DynamicGraph,
    forest: &RootedForest,
    depth: usize,
) -> Result<bool, StaticError> {
    let gv: BTreeSet<_> = graph.vertices().collect();
    let fv: BTreeSet<_> = forest.vertices().collect();
    if gv != fv {
        return Err(StaticError::VertexSetMismatch);
    }
    if forest.depth() > depth {
        return Ok(false);
    }
    Ok(graph
        .edges()
        .all(|(u, v)| forest.is_ancestor(u, v) || forest.is_ancestor(v, u)))
}
