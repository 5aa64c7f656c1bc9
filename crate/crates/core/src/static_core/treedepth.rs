//! Exact tree-depth by the elimination recursion
//! `td(C) = 1 + min_v max_K td(K)` over components `K` of `C - v`,
//! memoized on vertex subsets. Exponential; intended for small inputs and as
//! the independent oracle for the dynamic structure.

use std::collections::{BTreeMap, HashMap};

use super::forest::RootedForest;
use crate::graph::{DynamicGraph, VertexId};

/// Largest graph the subset solver accepts (subsets are `u128` masks).
pub const MAX_EXACT_VERTICES: usize = 128;

type Mask = u128;

fn bits(mask: Mask) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// Subset-memoized decision procedure over a fixed graph.
pub(crate) struct SubsetSolver {
    ids: Vec<VertexId>,
    adj: Vec<Mask>,
    decide_memo: HashMap<(Mask, usize), bool>,
    td_memo: HashMap<Mask, usize>,
}

impl SubsetSolver {
    pub(crate) fn new(graph: &DynamicGraph) -> Self {
        let ids: Vec<VertexId> = graph.vertices().collect();
        assert!(
            ids.len() <= MAX_EXACT_VERTICES,
            "exact tree-depth limited to {MAX_EXACT_VERTICES} vertices"
        );
        let index: BTreeMap<VertexId, usize> =
            ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let adj = ids
            .iter()
            .map(|&v| {
                graph
                    .neighbors(v)
                    .fold(0 as Mask, |m, u| m | (1 << index[&u]))
            })
            .collect();
        Self {
            ids,
            adj,
            decide_memo: HashMap::new(),
            td_memo: HashMap::new(),
        }
    }

    pub(crate) fn full(&self) -> Mask {
        if self.ids.len() == 128 {
            Mask::MAX
        } else {
            (1 << self.ids.len()) - 1
        }
    }

    pub(crate) fn index_of(&self, v: VertexId) -> Option<usize> {
        self.ids.binary_search(&v).ok()
    }

    fn components(&self, mask: Mask) -> Vec<Mask> {
        let mut rest = mask;
        let mut out = Vec::new();
        while rest != 0 {
            let start = rest & rest.wrapping_neg();
            let mut comp = start;
            let mut frontier = start;
            while frontier != 0 {
                let mut next = 0;
                for i in bits(frontier) {
                    next |= self.adj[i];
                }
                next &= mask & !comp;
                comp |= next;
                frontier = next;
            }
            rest &= !comp;
            out.push(comp);
        }
        out
    }

    /// Whether the connected set `comp` has a decomposition of depth `<= t`.
    fn decide_connected(&mut self, comp: Mask, t: usize) -> bool {
        if t == 0 {
            return false;
        }
        if comp.count_ones() == 1 {
            return true;
        }
        if t == 1 {
            return false;
        }
        if let Some(&known) = self.td_memo.get(&comp) {
            return known <= t;
        }
        if let Some(&r) = self.decide_memo.get(&(comp, t)) {
            return r;
        }
        let mut ok = false;
        for v in bits(comp) {
            if self.decide_rooted(comp, v, t) {
                ok = true;
                break;
            }
        }
        self.decide_memo.insert((comp, t), ok);
        ok
    }

    /// Whether `comp` (connected, containing `root`) has a decomposition of
    /// depth `<= t` rooted at `root`.
    fn decide_rooted(&mut self, comp: Mask, root: usize, t: usize) -> bool {
        if t == 0 {
            return false;
        }
        let rest = comp & !(1 << root);
        self.components(rest)
            .into_iter()
            .all(|k| self.decide_connected(k, t - 1))
    }

    fn td_connected(&mut self, comp: Mask) -> usize {
        if let Some(&d) = self.td_memo.get(&comp) {
            return d;
        }
        let mut t = 1;
        while !self.decide_connected(comp, t) {
            t += 1;
        }
        self.td_memo.insert(comp, t);
        t
    }

    pub(crate) fn td(&mut self, mask: Mask) -> usize {
        self.components(mask)
            .into_iter()
            .map(|c| self.td_connected(c))
            .max()
            .unwrap_or(0)
    }

    /// Builds a minimum-depth decomposition of the connected set `comp`,
    /// choosing the smallest-id root among minimizers.
    fn build(&mut self, comp: Mask, parent: Option<usize>, out: &mut Vec<(usize, Option<usize>)>) {
        let target = self.td_connected(comp);
        let root = bits(comp)
            .find(|&v| self.decide_rooted(comp, v, target))
            .expect("td witness exists");
        out.push((root, parent));
        let rest = comp & !(1 << root);
        for k in self.components(rest) {
            self.build(k, Some(root), out);
        }
    }

    fn build_rooted(&mut self, comp: Mask, root: usize, out: &mut Vec<(usize, Option<usize>)>) {
        out.push((root, None));
        let rest = comp & !(1 << root);
        for k in self.components(rest) {
            self.build(k, Some(root), out);
        }
    }

    fn forest(&self, pairs: Vec<(usize, Option<usize>)>, depth_bound: usize) -> RootedForest {
        let parent = pairs
            .into_iter()
            .map(|(v, p)| (self.ids[v], p.map(|p| self.ids[p])))
            .collect();
        RootedForest::from_parents(parent, depth_bound).expect("solver emits a forest")
    }
}

/// Exact tree-depth; 0 for the empty graph.
pub fn tree_depth(graph: &DynamicGraph) -> usize {
    let mut s = SubsetSolver::new(graph);
    let full = s.full();
    s.td(full)
}

/// A decomposition of depth at most `depth` whose closure contains the graph,
/// or `None` when the tree-depth exceeds `depth`.
pub fn optimal_decomposition(graph: &DynamicGraph, depth: usize) -> Option<RootedForest> {
    let mut s = SubsetSolver::new(graph);
    let full = s.full();
    if s.td(full) > depth {
        return None;
    }
    let mut pairs = Vec::new();
    for comp in s.components(full) {
        s.build(comp, None, &mut pairs);
    }
    Some(s.forest(pairs, depth))
}

/// Whether the component of `root` has a decomposition of depth at most
/// `depth` rooted at `root`. Other components are ignored.
pub fn admits_root(graph: &DynamicGraph, root: VertexId, depth: usize) -> bool {
    let mut s = SubsetSolver::new(graph);
    let Some(r) = s.index_of(root) else {
        return false;
    };
    let comp = s
        .components(s.full())
        .into_iter()
        .find(|c| c & (1 << r) != 0)
        .unwrap();
    s.decide_rooted(comp, r, depth)
}

/// Decomposition of the component of `root`, rooted at `root`, with depth at
/// most `depth`; `None` if no such decomposition exists.
pub fn rooted_decomposition(
    graph: &DynamicGraph,
    root: VertexId,
    depth: usize,
) -> Option<RootedForest> {
    let mut s = SubsetSolver::new(graph);
    let r = s.index_of(root)?;
    let comp = s
        .components(s.full())
        .into_iter()
        .find(|c| c & (1 << r) != 0)
        .unwrap();
    if !s.decide_rooted(comp, r, depth) {
        return None;
    }
    let mut pairs = Vec::new();
    s.build_rooted(comp, r, &mut pairs);
    Some(s.forest(pairs, depth))
}

/// Roots admissible for a depth-`depth` decomposition of the component of
/// each vertex, for every vertex at once. Shares one memo table.
pub fn admissible_roots(graph: &DynamicGraph, depth: usize) -> Vec<VertexId> {
    let mut s = SubsetSolver::new(graph);
    let comps = s.components(s.full());
    let mut out = Vec::new();
    for i in 0..s.ids.len() {
        let comp = *comps.iter().find(|c| *c & (1 << i) != 0).unwrap();
        if s.decide_rooted(comp, i, depth) {
            out.push(s.ids[i]);
        }
    }
    out
}
