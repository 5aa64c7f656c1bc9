//! Mutable simple undirected graph with stable vertex identities.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque vertex identity. Identities come from a monotone counter and are
/// never handed out twice by the same graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {0} is not present")]
    NotPresent(VertexId),
    #[error("vertex {0} still has incident edges")]
    NotIsolated(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DynamicGraph {
    adjacency: BTreeMap<VertexId, BTreeSet<VertexId>>,
    next_id: u64,
    edges: usize,
}

impl DynamicGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph with `n` fresh isolated vertices; returns the graph and the ids in order.
    pub fn with_vertices(n: usize) -> (Self, Vec<VertexId>) {
        let mut g = Self::new();
        let ids = (0..n).map(|_| g.add_vertex()).collect();
        (g, ids)
    }

    /// Builds a graph on `n` vertices from index pairs. Panics on bad indices;
    /// meant for tests and small fixtures.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> (Self, Vec<VertexId>) {
        let (mut g, ids) = Self::with_vertices(n);
        for &(a, b) in edges {
            g.set_edge(ids[a], ids[b], true)
                .expect("valid fixture edge");
        }
        (g, ids)
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let id = VertexId(self.next_id);
        self.next_id += 1;
        self.adjacency.insert(id, BTreeSet::new());
        id
    }

    pub fn remove_vertex(&mut self, v: VertexId) -> Result<(), GraphError> {
        match self.adjacency.get(&v) {
            None => Err(GraphError::NotPresent(v)),
            Some(n) if !n.is_empty() => Err(GraphError::NotIsolated(v)),
            Some(_) => {
                self.adjacency.remove(&v);
                Ok(())
            }
        }
    }

    pub fn set_edge(&mut self, u: VertexId, v: VertexId, present: bool) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for x in [u, v] {
            if !self.adjacency.contains_key(&x) {
                return Err(GraphError::NotPresent(x));
            }
        }
        let changed = if present {
            self.adjacency.get_mut(&u).unwrap().insert(v)
        } else {
            self.adjacency.get_mut(&u).unwrap().remove(&v)
        };
        if present {
            self.adjacency.get_mut(&v).unwrap().insert(u);
        } else {
            self.adjacency.get_mut(&v).unwrap().remove(&u);
        }
        if changed {
            if present {
                self.edges += 1;
            } else {
                self.edges -= 1;
            }
        }
        Ok(())
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.adjacency.contains_key(&v)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency.get(&u).is_some_and(|n| n.contains(&v))
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency
            .get(&v)
            .into_iter()
            .flat_map(|n| n.iter().copied())
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency.get(&v).map_or(0, |n| n.len())
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Every edge once, as `(smaller, larger)`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency
            .iter()
            .flat_map(|(&u, n)| n.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Vertex set of the connected component containing `v`, by traversal.
    pub fn component_of(&self, v: VertexId) -> Result<BTreeSet<VertexId>, GraphError> {
        if !self.contains(v) {
            return Err(GraphError::NotPresent(v));
        }
        let mut seen = BTreeSet::from([v]);
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for y in self.neighbors(x) {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        Ok(seen)
    }

    /// All connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.vertices() {
            if seen.contains(&v) {
                continue;
            }
            let comp = self.component_of(v).unwrap();
            seen.extend(comp.iter().copied());
            out.push(comp.into_iter().collect());
        }
        out
    }

    /// Induced subgraph on `keep`. Vertex ids are preserved.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> DynamicGraph {
        let mut adjacency = BTreeMap::new();
        let mut edges = 0;
        for &v in keep {
            if let Some(n) = self.adjacency.get(&v) {
                let kept: BTreeSet<_> = n.intersection(keep).copied().collect();
                edges += kept.len();
                adjacency.insert(v, kept);
            }
        }
        DynamicGraph {
            adjacency,
            next_id: self.next_id,
            edges: edges / 2,
        }
    }

    /// Full-scan check of symmetry and loop-freeness.
    pub fn check_invariants(&self) -> bool {
        let mut degree_sum = 0;
        for (&u, n) in &self.adjacency {
            degree_sum += n.len();
            if n.contains(&u) {
                return false;
            }
            for v in n {
                if !self.has_edge(*v, u) {
                    return false;
                }
            }
        }
        degree_sum == 2 * self.edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_vertex_is_fresh() {
        let mut g = DynamicGraph::new();
        let a = g.add_vertex();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));
        let b = g.add_vertex();
        let c = g.add_vertex();
        assert!(c != a && c != b);
        let many: BTreeSet<_> = (0..100).map(|_| g.add_vertex()).collect();
        assert_eq!(many.len(), 100);
    }

    #[test]
    fn ids_are_not_recycled() {
        let mut g = DynamicGraph::new();
        let a = g.add_vertex();
        g.remove_vertex(a).unwrap();
        assert_ne!(g.add_vertex(), a);
    }

    #[test]
    fn remove_vertex_errors() {
        let (mut g, ids) = DynamicGraph::from_edges(2, &[(0, 1)]);
        assert_eq!(
            g.remove_vertex(ids[0]),
            Err(GraphError::NotIsolated(ids[0]))
        );
        let mut s = DynamicGraph::new();
        let v = s.add_vertex();
        s.remove_vertex(v).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.remove_vertex(v), Err(GraphError::NotPresent(v)));
        g.set_edge(ids[0], ids[1], false).unwrap();
        g.remove_vertex(ids[0]).unwrap();
    }

    #[test]
    fn set_edge_errors() {
        let (mut g, ids) = DynamicGraph::from_edges(2, &[]);
        assert_eq!(
            g.set_edge(ids[0], ids[0], true),
            Err(GraphError::SelfLoop(ids[0]))
        );
        assert_eq!(
            g.set_edge(ids[0], VertexId(99), true),
            Err(GraphError::NotPresent(VertexId(99)))
        );
    }

    #[test]
    fn components() {
        let (g, ids) = DynamicGraph::from_edges(1, &[]);
        assert_eq!(g.component_of(ids[0]).unwrap(), BTreeSet::from([ids[0]]));
        let (g, ids) = DynamicGraph::from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(g.component_of(ids[0]).unwrap().len(), 3);
        let (g, ids) = DynamicGraph::from_edges(4, &[(0, 1), (2, 3)]);
        assert_eq!(
            g.component_of(ids[2]).unwrap(),
            BTreeSet::from([ids[2], ids[3]])
        );
        assert_eq!(g.components().len(), 2);
    }
}
