//! Kernels: `S`-capped copies of (marked) components, small enough to hand
//! to the exhaustive oracles.

use std::collections::{BTreeSet, HashMap};

use super::classes::{ClassId, Interner, MARK_A, MARK_B, MARK_R};
use crate::graph::{DynamicGraph, VertexId};
use crate::minimal::Bits;
use crate::static_core::{tree_depth, CanonicalKey, LabelledTree, MAX_EXACT_VERTICES};

/// Label of the virtual node joining the components of a kernel.
const VIRTUAL: u16 = u16::MAX;

pub(crate) fn node_label(bits: Bits, marks: u8) -> u16 {
    bits as u16 | (marks as u16) << 8
}

/// A kernel forest hung below a virtual node 0. `real[i]` is the vertex a
/// node was copied from, when known.
pub(crate) struct Kernel {
    pub tree: LabelledTree<u16>,
    pub real: Vec<Option<VertexId>>,
}

impl Kernel {
    pub fn new() -> Self {
        Self {
            tree: LabelledTree::leaf(VIRTUAL),
            real: vec![None],
        }
    }

    pub fn add(&mut self, parent: usize, label: u16, real: Option<VertexId>) -> usize {
        self.real.push(real);
        self.tree.add_child(parent, label)
    }

    /// Expands a class below `parent`, `count` copies per child class.
    pub fn expand(&mut self, classes: &Interner, c: ClassId, parent: usize) {
        let info = classes.info(c);
        let node = self.add(parent, node_label(info.key.bits, info.key.marks), None);
        for &(child, n) in &info.key.children {
            for _ in 0..n {
                self.expand(classes, child, node);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.tree.len() - 1
    }

    /// The encoded graph plus an edge between the `A`- and `B`-marked
    /// nodes. Graph vertex `i` is kernel node `i + 1`.
    pub fn graph(&self) -> (DynamicGraph, Vec<VertexId>) {
        let n = self.len();
        let (mut g, ids) = DynamicGraph::with_vertices(n);
        let (mut a, mut b) = (None, None);
        for i in 1..self.tree.len() {
            let label = *self.tree.label(i);
            let (bits, marks) = (label as u8, (label >> 8) as u8);
            if marks & MARK_A != 0 {
                a = Some(i);
            }
            if marks & MARK_B != 0 {
                b = Some(i);
            }
            let mut anc = self.tree.parent(i);
            let mut k = 0;
            while let Some(p) = anc {
                if p == 0 {
                    break;
                }
                if bits >> k & 1 == 1 {
                    g.set_edge(ids[i - 1], ids[p - 1], true)
                        .expect("tree nodes differ");
                }
                anc = self.tree.parent(p);
                k += 1;
            }
        }
        if let (Some(a), Some(b)) = (a, b) {
            if a != b {
                g.set_edge(ids[a - 1], ids[b - 1], true)
                    .expect("marked nodes differ");
            }
        }
        (g, ids)
    }
}

#[derive(Default)]
pub(crate) struct RootMemo {
    memo: HashMap<(CanonicalKey, usize), Option<usize>>,
    pub lookups: u64,
    pub misses: u64,
}

impl RootMemo {
    /// First node in canonical order that can root a decomposition of depth
    /// `t`: every component of the kernel graph minus that node has
    /// tree-depth below `t`. Restricted to `R`-marked nodes when there are
    /// any. Returns a kernel node index.
    pub fn choose(&mut self, k: &Kernel, t: usize) -> Option<usize> {
        let key = k.tree.subtree_keys().swap_remove(0);
        let order = k.tree.canonical_order();
        self.lookups += 1;
        if let Some(pos) = self.memo.get(&(key.clone(), t)) {
            return pos.map(|p| order[p]);
        }
        self.misses += 1;
        let pos = Self::solve(k, &order, t);
        self.memo.insert((key, t), pos);
        pos.map(|p| order[p])
    }

    fn solve(k: &Kernel, order: &[usize], t: usize) -> Option<usize> {
        if t == 0 || k.len() == 0 {
            return None;
        }
        assert!(
            k.len() <= MAX_EXACT_VERTICES,
            "kernel of {} vertices exceeds the exact solver",
            k.len()
        );
        let (g, ids) = k.graph();
        let forced = (1..k.tree.len()).any(|i| (*k.tree.label(i) >> 8) as u8 & MARK_R != 0);
        order.iter().enumerate().skip(1).find_map(|(pos, &node)| {
            let marks = (*k.tree.label(node) >> 8) as u8;
            if forced && marks & MARK_R == 0 {
                return None;
            }
            let r = ids[node - 1];
            let rest: BTreeSet<VertexId> = ids.iter().copied().filter(|&v| v != r).collect();
            (tree_depth(&g.induced(&rest)) < t).then_some(pos)
        })
    }
}
