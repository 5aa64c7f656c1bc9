//! Labelled rooted trees and their canonical keys.
//!
//! A node's key is `(` + length-prefixed label bytes + sorted child keys + `)`.
//! Two trees get the same key exactly when they are isomorphic by a
//! root-preserving, label-preserving map.

use serde::{Deserialize, Serialize};

/// Labels that can be written into a canonical key.
pub trait KeyLabel {
    fn write_key(&self, out: &mut Vec<u8>);
}

macro_rules! int_key_label {
    ($($t:ty),*) => {$(
        impl KeyLabel for $t {
            fn write_key(&self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_be_bytes());
            }
        }
    )*};
}
int_key_label!(u8, u16, u32, u64);

impl KeyLabel for () {
    fn write_key(&self, _out: &mut Vec<u8>) {}
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalKey(pub Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode<L> {
    pub label: L,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Rooted tree with a label per node. Node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelledTree<L> {
    nodes: Vec<TreeNode<L>>,
}

impl<L> LabelledTree<L> {
    pub fn leaf(label: L) -> Self {
        Self {
            nodes: vec![TreeNode {
                label,
                parent: None,
                children: Vec::new(),
            }],
        }
    }

    /// Appends a child under `parent` and returns its index.
    pub fn add_child(&mut self, parent: usize, label: L) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            label,
            parent: Some(parent),
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    /// Grafts a copy of `sub` under `parent`; returns the index of its root.
    pub fn graft(&mut self, parent: usize, sub: &LabelledTree<L>) -> usize
    where
        L: Clone,
    {
        let mut map = vec![0; sub.len()];
        for i in 0..sub.len() {
            let p = match sub.nodes[i].parent {
                None => parent,
                Some(p) => map[p],
            };
            map[i] = self.add_child(p, sub.nodes[i].label.clone());
        }
        map[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &TreeNode<L> {
        &self.nodes[i]
    }

    pub fn label(&self, i: usize) -> &L {
        &self.nodes[i].label
    }

    pub fn label_mut(&mut self, i: usize) -> &mut L {
        &mut self.nodes[i].label
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.nodes[i].children
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.nodes[i].parent
    }

    /// Depth of node `i` in vertices (the root has depth 1).
    pub fn depth_of(&self, i: usize) -> usize {
        let mut d = 1;
        let mut cur = i;
        while let Some(p) = self.nodes[cur].parent {
            d += 1;
            cur = p;
        }
        d
    }

    /// Vertex count of the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        (0..self.len()).map(|i| self.depth_of(i)).max().unwrap_or(0)
    }

    /// Copy of the subtree rooted at `i`.
    pub fn subtree(&self, i: usize) -> LabelledTree<L>
    where
        L: Clone,
    {
        let mut out = LabelledTree::leaf(self.nodes[i].label.clone());
        let mut stack = vec![(i, 0)];
        while let Some((src, dst)) = stack.pop() {
            for &c in &self.nodes[src].children {
                let d = out.add_child(dst, self.nodes[c].label.clone());
                stack.push((c, d));
            }
        }
        out
    }

    /// Copy with the subtree rooted at `i` (not the root) removed.
    pub fn without_subtree(&self, i: usize) -> LabelledTree<L>
    where
        L: Clone,
    {
        assert!(i != 0, "cannot remove the root");
        let mut out = LabelledTree::leaf(self.nodes[0].label.clone());
        let mut stack = vec![(0, 0)];
        while let Some((src, dst)) = stack.pop() {
            for &c in &self.nodes[src].children {
                if c == i {
                    continue;
                }
                let d = out.add_child(dst, self.nodes[c].label.clone());
                stack.push((c, d));
            }
        }
        out
    }
}

impl<L: KeyLabel> LabelledTree<L> {
    /// Canonical key of every node's subtree, indexed by node.
    pub fn subtree_keys(&self) -> Vec<CanonicalKey> {
        let mut keys: Vec<Vec<u8>> = vec![Vec::new(); self.len()];
        // Nodes are appended after their parents, so reverse index order is
        // children-first.
        for i in (0..self.len()).rev() {
            let mut child: Vec<&Vec<u8>> =
                self.nodes[i].children.iter().map(|&c| &keys[c]).collect();
            child.sort();
            let mut k = Vec::new();
            let mut label = Vec::new();
            self.nodes[i].label.write_key(&mut label);
            k.push(b'(');
            k.extend_from_slice(&(label.len() as u32).to_be_bytes());
            k.extend_from_slice(&label);
            for c in child {
                k.extend_from_slice(c);
            }
            k.push(b')');
            keys[i] = k;
        }
        keys.into_iter().map(CanonicalKey).collect()
    }

    /// Node indices in canonical order: preorder with children sorted by key,
    /// ties kept in insertion order. Isomorphic trees list corresponding nodes
    /// at equal positions.
    pub fn canonical_order(&self) -> Vec<usize> {
        let keys = self.subtree_keys();
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            out.push(i);
            let mut ch = self.nodes[i].children.clone();
            ch.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
            for &c in ch.iter().rev() {
                stack.push(c);
            }
        }
        out
    }
}

pub fn canonical_key<L: KeyLabel>(tree: &LabelledTree<L>) -> CanonicalKey {
    if tree.is_empty() {
        return CanonicalKey(Vec::new());
    }
    tree.subtree_keys().swap_remove(0)
}
