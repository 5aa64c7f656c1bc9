//! Off-line recomputation of a decomposition for a set of vertices, used by
//! rerooting and by insertions that leave the tree order.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::classes::{ClassId, Interner, MARK_A, MARK_B};
use super::kernel::{node_label, Kernel, RootMemo};
use crate::graph::{DynamicGraph, VertexId};
use crate::minimal::Bits;

pub(crate) enum Fail {
    /// No admissible root at recursion level `level`.
    Infeasible {
        level: usize,
    },
    KernelTooLarge {
        size: usize,
        cap: usize,
    },
}

pub(crate) struct Decomposer<'a> {
    pub graph: &'a DynamicGraph,
    /// Parent links of the current decomposition over every vertex involved.
    pub old: &'a HashMap<VertexId, Option<VertexId>>,
    pub s: usize,
    pub classes: &'a mut Interner,
    pub memo: &'a mut RootMemo,
    pub kernel_cap: usize,
    /// The edge being inserted; marked on kernels where the tree order
    /// does not carry it.
    pub pending_edge: Option<(VertexId, VertexId)>,
    pub touches: usize,
    pub reroot_depth: usize,
    pub out: BTreeMap<VertexId, Option<VertexId>>,
}

struct Induced {
    parent: HashMap<VertexId, Option<VertexId>>,
    depth: HashMap<VertexId, usize>,
}

impl Induced {
    fn is_ancestor(&self, a: VertexId, mut d: VertexId) -> bool {
        while let Some(p) = self.parent[&d] {
            if p == a {
                return true;
            }
            d = p;
        }
        false
    }

    fn related(&self, x: VertexId, y: VertexId) -> bool {
        self.is_ancestor(x, y) || self.is_ancestor(y, x)
    }
}

impl Decomposer<'_> {
    fn components(&self, verts: &BTreeSet<VertexId>) -> Vec<BTreeSet<VertexId>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &v in verts {
            if seen.contains(&v) {
                continue;
            }
            let mut comp = BTreeSet::from([v]);
            let mut stack = vec![v];
            while let Some(x) = stack.pop() {
                for y in self.graph.neighbors(x) {
                    if verts.contains(&y) && comp.insert(y) {
                        stack.push(y);
                    }
                }
            }
            seen.extend(comp.iter().copied());
            out.push(comp);
        }
        out
    }

    fn induce(&self, comp: &BTreeSet<VertexId>) -> Induced {
        let mut parent = HashMap::with_capacity(comp.len());
        for &x in comp {
            let mut p = self.old[&x];
            while let Some(q) = p {
                if comp.contains(&q) {
                    break;
                }
                p = self.old[&q];
            }
            parent.insert(x, p);
        }
        let mut depth = HashMap::with_capacity(comp.len());
        for &x in comp {
            let mut d = 1;
            let mut cur = x;
            while let Some(p) = parent[&cur] {
                d += 1;
                cur = p;
            }
            depth.insert(x, d);
        }
        Induced { parent, depth }
    }

    fn keeps(&self, comp: &BTreeSet<VertexId>, ind: &Induced, t: usize) -> bool {
        comp.iter().all(|&x| {
            ind.depth[&x] <= t
                && self
                    .graph
                    .neighbors(x)
                    .filter(|y| comp.contains(y))
                    .all(|y| ind.related(x, y))
        })
    }

    /// Decomposes `verts` with depth at most `t`, hanging every tree below
    /// `attach`. A component keeps its current shape when that is already
    /// good enough; otherwise a root is picked on its kernel, or `forced`
    /// is used when it lies in the component.
    pub fn run(
        &mut self,
        verts: &BTreeSet<VertexId>,
        t: usize,
        forced: Option<VertexId>,
        attach: Option<VertexId>,
        level: usize,
    ) -> Result<(), Fail> {
        for comp in self.components(verts) {
            self.touches += comp.len();
            if t == 0 {
                return Err(Fail::Infeasible { level });
            }
            let ind = self.induce(&comp);
            let forced_here = forced.filter(|f| comp.contains(f));
            if self.keeps(&comp, &ind, t) && forced_here.map_or(true, |f| ind.parent[&f].is_none())
            {
                for &x in &comp {
                    self.out.insert(x, ind.parent[&x].or(attach));
                }
                continue;
            }
            let r = match forced_here {
                Some(f) => f,
                None => self
                    .choose(&comp, &ind, t)?
                    .ok_or(Fail::Infeasible { level })?,
            };
            self.reroot_depth = self.reroot_depth.max(level + 1);
            self.out.insert(r, attach);
            let mut rest = comp;
            rest.remove(&r);
            self.run(&rest, t - 1, None, Some(r), level + 1)?;
        }
        Ok(())
    }

    /// Root for the current shape of `verts` taken as a whole.
    pub fn root_of(
        &mut self,
        verts: &BTreeSet<VertexId>,
        t: usize,
    ) -> Result<Option<VertexId>, Fail> {
        if t == 0 || verts.is_empty() {
            return Ok(None);
        }
        let ind = self.induce(verts);
        self.choose(verts, &ind, t)
    }

    /// Root picked on the kernel of the component's current shape.
    fn choose(
        &mut self,
        comp: &BTreeSet<VertexId>,
        ind: &Induced,
        t: usize,
    ) -> Result<Option<VertexId>, Fail> {
        let marked = self.pending_edge.filter(|&(u, v)| {
            comp.contains(&u)
                && comp.contains(&v)
                && (!ind.related(u, v) || !self.graph.has_edge(u, v))
        });
        let mut order: Vec<VertexId> = comp.iter().copied().collect();
        order.sort_by_key(|x| std::cmp::Reverse(ind.depth[x]));
        let mut children: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for &x in comp {
            if let Some(p) = ind.parent[&x] {
                children.entry(p).or_default().push(x);
            }
        }
        let mut class: HashMap<VertexId, ClassId> = HashMap::with_capacity(comp.len());
        for &x in &order {
            let mut bits: Bits = 0;
            let mut anc = ind.parent[&x];
            let mut k = 0;
            while let Some(p) = anc {
                if self.graph.has_edge(x, p) {
                    bits |= 1 << k;
                }
                anc = ind.parent[&p];
                k += 1;
            }
            let marks = match marked {
                Some((u, _)) if u == x => MARK_A,
                Some((_, v)) if v == x => MARK_B,
                _ => 0,
            };
            let counts: Vec<(ClassId, usize)> = children
                .get(&x)
                .map(|ch| ch.iter().map(|c| (class[c], 1)).collect())
                .unwrap_or_default();
            class.insert(x, self.classes.intern_counts(bits, marks, counts, self.s));
        }

        let mut k = Kernel::new();
        let mut roots: Vec<VertexId> = comp
            .iter()
            .copied()
            .filter(|x| ind.parent[x].is_none())
            .collect();
        roots.sort();
        let mut stack: Vec<(VertexId, usize)> = roots.into_iter().map(|r| (r, 0)).collect();
        while let Some((x, parent)) = stack.pop() {
            let key = &self.classes.info(class[&x]).key;
            let node = k.add(parent, node_label(key.bits, key.marks), Some(x));
            if k.len() > self.kernel_cap {
                return Err(Fail::KernelTooLarge {
                    size: k.len(),
                    cap: self.kernel_cap,
                });
            }
            let mut groups: BTreeMap<ClassId, Vec<VertexId>> = BTreeMap::new();
            if let Some(ch) = children.get(&x) {
                for &c in ch {
                    groups.entry(class[&c]).or_default().push(c);
                }
            }
            for (_, mut members) in groups {
                members.sort();
                for &c in members.iter().take(self.s) {
                    stack.push((c, node));
                }
            }
        }
        Ok(self
            .memo
            .choose(&k, t)
            .map(|n| k.real[n].expect("kernel nodes are real")))
    }
}
