use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::classes::ClassId;
use super::scratch::{Decomposer, Fail};
use super::{
    tree_vertices, Counters, Drawer, DrawerId, DynConfig, DynError, DynamicDecomposition, VRec,
};
use crate::graph::{DynamicGraph, VertexId};
use crate::minimal::Bits;
use crate::mso::{ConstantAssignment, Formula};
use crate::static_core::{is_valid_decomposition, optimal_decomposition, RootedForest};

use super::EXACT_INIT_VERTICES;

/// Result of [`DynamicDecomposition::extract_path`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Extraction {
    /// Root first, the extracted vertex last.
    pub path: Vec<VertexId>,
    /// Path vertices that were split out of a larger drawer.
    pub split: Vec<VertexId>,
}

impl DynamicDecomposition {
    /// Builds the structure for `graph`. Small components are decomposed
    /// exactly, larger ones from a depth-first tree when that is shallow
    /// enough and by edge insertion otherwise.
    pub fn initialize(
        graph: &DynamicGraph,
        cfg: DynConfig,
        phi: Formula,
    ) -> Result<Self, DynError> {
        let mut d = Self::new(cfg, phi)?;
        d.graph = graph.clone();
        let mut parents: BTreeMap<VertexId, Option<VertexId>> = BTreeMap::new();
        let mut late: Vec<(VertexId, VertexId)> = Vec::new();
        for comp in graph.components() {
            if comp.len() <= EXACT_INIT_VERTICES {
                let set: BTreeSet<VertexId> = comp.iter().copied().collect();
                let f = optimal_decomposition(&graph.induced(&set), cfg.depth)
                    .ok_or(DynError::DepthExceeded(cfg.depth))?;
                parents.extend(f.parents().iter().map(|(&v, &p)| (v, p)));
            } else if let Some(tree) = dfs_tree(graph, &comp, cfg.depth) {
                parents.extend(tree);
            } else {
                for &v in &comp {
                    parents.insert(v, None);
                    for w in graph.neighbors(v) {
                        if v < w {
                            late.push((v, w));
                        }
                    }
                }
            }
        }
        for &(u, v) in &late {
            d.graph.set_edge(u, v, false)?;
        }
        let all: BTreeSet<VertexId> = parents.keys().copied().collect();
        d.rebuild(&BTreeSet::new(), &all, &parents);
        for (u, v) in late {
            d.insert_edge(u, v).map_err(|e| match e {
                DynError::DepthWouldExceed(..) | DynError::NoRootWitness { .. } => {
                    DynError::DepthExceeded(cfg.depth)
                }
                e => e,
            })?;
        }
        d.refresh_answer()?;
        d.last = Counters::default();
        Ok(d)
    }

    /// Compresses a given decomposition of `graph`.
    pub fn from_forest(
        graph: &DynamicGraph,
        forest: &RootedForest,
        cfg: DynConfig,
        phi: Formula,
    ) -> Result<Self, DynError> {
        let ok = is_valid_decomposition(graph, forest, cfg.depth)
            .map_err(|_| DynError::DepthExceeded(cfg.depth))?;
        if !ok {
            return Err(DynError::DepthExceeded(cfg.depth));
        }
        let mut d = Self::new(cfg, phi)?;
        d.graph = graph.clone();
        let all: BTreeSet<VertexId> = forest.vertices().collect();
        d.rebuild(&BTreeSet::new(), &all, forest.parents());
        d.refresh_answer()?;
        Ok(d)
    }

    pub fn add_isolated_vertex(&mut self) -> Result<VertexId, DynError> {
        let v = self.graph.add_vertex();
        self.recs.insert(v, blank());
        let c = self.classes.intern_counts(0, 0, [], self.cfg.s);
        self.add_root(v, c);
        self.refresh_answer()?;
        self.last = Counters {
            cabinets_touched: 1,
            ..Counters::default()
        };
        Ok(v)
    }

    pub fn remove_isolated_vertex(&mut self, v: VertexId) -> Result<(), DynError> {
        self.rec(v)?;
        if self.graph.degree(v) > 0 {
            return Err(DynError::NotIsolated(v));
        }
        let rec = &self.recs[&v];
        if self.root_pos.contains_key(&v) && rec.children.is_empty() {
            let d = rec.drawer;
            self.drop_root(v);
            self.release(d);
            self.recs.remove(&v);
            self.graph.remove_vertex(v)?;
            self.refresh_answer()?;
            self.last = Counters {
                cabinets_touched: 1,
                ..Counters::default()
            };
            return Ok(());
        }
        // An isolated vertex with descendants: the rest of its tree keeps
        // its induced shape.
        let all = tree_vertices(self, &[v]);
        let old = self.parent_map(&all);
        let mut rest = all.clone();
        rest.remove(&v);
        self.graph.remove_vertex(v)?;
        let (out, touches, _) = self
            .decompose(&old, &rest, None, None)
            .map_err(|e| self.fail_to_error(e, None))?;
        self.rebuild(&all, &rest, &out);
        self.refresh_answer()?;
        self.last = Counters {
            cabinets_touched: touches + all.len(),
            ..Counters::default()
        };
        Ok(())
    }

    /// Makes every vertex on the root-to-`v` path the only member of its
    /// drawer. The parents of the path drawers become dirty until
    /// [`clean_dirty`](Self::clean_dirty).
    pub fn extract_path(&mut self, v: VertexId) -> Result<Extraction, DynError> {
        self.rec(v)?;
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.drawer(self.recs[&cur].drawer).parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        self.touch(path.len());
        let mut split = Vec::new();
        for &x in &path[1..] {
            let d = self.recs[&x].drawer;
            let dr = self.drawer(d).clone();
            let w = dr.parent.expect("non-root has a parent");
            if dr.len > 1 {
                self.unlink(x);
                let nd = self.alloc(Drawer {
                    head: x,
                    tail: x,
                    len: 1,
                    parent: Some(w),
                    class: dr.class,
                });
                self.recs.get_mut(&x).unwrap().drawer = nd;
                self.recs.get_mut(&w).unwrap().pending.push(nd);
                split.push(x);
                self.touch(1);
            } else {
                let wr = self.recs.get_mut(&w).unwrap();
                wr.children.remove(&dr.class);
                wr.pending.push(d);
            }
        }
        Ok(Extraction { path, split })
    }

    /// Recomputes labels along an extracted path, bottom-up, merging each
    /// path vertex into a sibling drawer of the same class when there is
    /// one.
    pub fn clean_dirty(&mut self, ext: Extraction) {
        self.refresh(&ext.path, None);
    }

    pub fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), DynError> {
        self.rec(u)?;
        self.rec(v)?;
        if !self.graph.has_edge(u, v) {
            return Err(DynError::NoSuchEdge(u, v));
        }
        self.last = Counters::default();
        let lower = if self.depth_of(u)? > self.depth_of(v)? {
            u
        } else {
            v
        };
        let ext = self.extract_path(lower)?;
        self.graph.set_edge(u, v, false)?;
        self.refresh(&ext.path, Some(lower));
        if !self
            .classes
            .info(self.class_of(ext.path[0])?)
            .loose
            .is_empty()
        {
            let h = ext.path[1..].iter().copied().find(|&x| {
                let info = self.classes.info(self.class_of(x).unwrap());
                info.head == 0 && info.loose.is_empty()
            });
            if let Some(h) = h {
                self.detach(h);
            }
        }
        self.last.path_length = ext.path.len();
        self.refresh_answer()
    }

    pub fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), DynError> {
        self.rec(u)?;
        self.rec(v)?;
        if u == v {
            return Err(DynError::SelfLoop(u));
        }
        if self.graph.has_edge(u, v) {
            return Err(DynError::EdgeExists(u, v));
        }
        let (du, dv) = (self.depth_of(u)?, self.depth_of(v)?);
        let (upper, lower) = if du <= dv { (u, v) } else { (v, u) };
        let mut cur = lower;
        for _ in 0..du.abs_diff(dv) {
            cur = self.parent(cur)?.expect("deeper vertex has ancestors");
        }
        if cur == upper && du != dv {
            self.last = Counters::default();
            let ext = self.extract_path(lower)?;
            self.graph.set_edge(u, v, true)?;
            self.refresh(&ext.path, Some(lower));
            self.last.path_length = ext.path.len();
            return self.refresh_answer();
        }

        let all = tree_vertices(self, &[u, v]);
        let old = self.parent_map(&all);
        self.graph.set_edge(u, v, true)?;
        match self.decompose(&old, &all, None, Some((u, v))) {
            Ok((out, touches, depth)) => {
                self.rebuild(&all, &all, &out);
                self.last = Counters {
                    cabinets_touched: touches + all.len(),
                    reroot_depth: depth,
                    path_length: 0,
                };
                self.refresh_answer()
            }
            Err(e) => {
                self.graph.set_edge(u, v, false)?;
                Err(self.fail_to_error(e, Some((u, v))))
            }
        }
    }

    /// Rebuilds the tree of `r` so that `r` becomes its root. Subtrees that
    /// already fit keep their shape.
    pub fn reroot(&mut self, r: VertexId) -> Result<(), DynError> {
        self.rec(r)?;
        self.last = Counters::default();
        if self.root_pos.contains_key(&r) {
            return Ok(());
        }
        let all = tree_vertices(self, &[r]);
        let old = self.parent_map(&all);
        let (out, touches, depth) =
            self.decompose(&old, &all, Some(r), None)
                .map_err(|e| match e {
                    Fail::Infeasible { level } => DynError::NoRootWitness { level },
                    e => self.fail_to_error(e, None),
                })?;
        self.rebuild(&all, &all, &out);
        self.last = Counters {
            cabinets_touched: touches + all.len(),
            reroot_depth: depth,
            path_length: 0,
        };
        self.refresh_answer()
    }

    /// A vertex that can root a decomposition of depth at most `t` of the
    /// tree containing `v`, with the constants joined by an extra edge.
    /// Chosen on the kernel of the tree, first admissible in canonical order.
    pub fn find_root(
        &mut self,
        v: VertexId,
        consts: ConstantAssignment,
        t: usize,
    ) -> Result<VertexId, DynError> {
        let all = tree_vertices(self, &[v]);
        for c in [consts.a, consts.b].into_iter().flatten() {
            if !all.contains(&c) {
                return Err(DynError::NotPresent(c));
            }
        }
        let old = self.parent_map(&all);
        let pair = match (consts.a, consts.b) {
            (Some(a), Some(b)) if a != b => Some((a, b)),
            _ => None,
        };
        let mut dec = Decomposer {
            graph: &self.graph,
            old: &old,
            s: self.cfg.s,
            classes: &mut self.classes,
            memo: &mut self.roots_memo,
            kernel_cap: self.cfg.kernel_cap,
            pending_edge: pair,
            touches: 0,
            reroot_depth: 0,
            out: BTreeMap::new(),
        };
        match dec.root_of(&all, t) {
            Ok(Some(r)) => Ok(r),
            Ok(None) => Err(DynError::Infeasible(t)),
            Err(e) => Err(self.fail_to_error(e, None)),
        }
    }

    fn decompose(
        &mut self,
        old: &HashMap<VertexId, Option<VertexId>>,
        verts: &BTreeSet<VertexId>,
        forced: Option<VertexId>,
        pending_edge: Option<(VertexId, VertexId)>,
    ) -> Result<(BTreeMap<VertexId, Option<VertexId>>, usize, usize), Fail> {
        let mut dec = Decomposer {
            graph: &self.graph,
            old,
            s: self.cfg.s,
            classes: &mut self.classes,
            memo: &mut self.roots_memo,
            kernel_cap: self.cfg.kernel_cap,
            pending_edge,
            touches: 0,
            reroot_depth: 0,
            out: BTreeMap::new(),
        };
        dec.run(verts, self.cfg.depth, forced, None, 0)?;
        Ok((dec.out, dec.touches, dec.reroot_depth))
    }

    fn fail_to_error(&self, e: Fail, edge: Option<(VertexId, VertexId)>) -> DynError {
        match (e, edge) {
            (Fail::Infeasible { level: 0 }, Some((u, v))) => DynError::DepthWouldExceed(u, v),
            (Fail::Infeasible { level: 0 }, None) => DynError::Infeasible(self.cfg.depth),
            (Fail::Infeasible { level }, _) => DynError::NoRootWitness { level },
            (Fail::KernelTooLarge { size, cap }, _) => DynError::KernelTooLarge { size, cap },
        }
    }

    fn parent_map(&self, verts: &BTreeSet<VertexId>) -> HashMap<VertexId, Option<VertexId>> {
        verts
            .iter()
            .map(|&x| (x, self.drawer(self.recs[&x].drawer).parent))
            .collect()
    }

    fn touch(&mut self, n: usize) {
        self.last.cabinets_touched += n;
    }

    fn bits_from_graph(&self, x: VertexId) -> Bits {
        let mut bits: Bits = 0;
        let mut anc = self.drawer(self.recs[&x].drawer).parent;
        let mut k = 0;
        while let Some(p) = anc {
            if self.graph.has_edge(x, p) {
                bits |= 1 << k;
            }
            anc = self.drawer(self.recs[&p].drawer).parent;
            k += 1;
        }
        bits
    }

    fn refresh(&mut self, path: &[VertexId], changed: Option<VertexId>) {
        for &x in path.iter().rev() {
            let d = self.recs[&x].drawer;
            let old_class = self.drawer(d).class;
            let bits = if changed == Some(x) {
                self.bits_from_graph(x)
            } else {
                self.classes.info(old_class).key.bits
            };
            debug_assert!(self.recs[&x].pending.is_empty());
            let counts: Vec<(ClassId, usize)> = self.recs[&x]
                .children
                .iter()
                .map(|(&c, &cd)| (c, self.drawer(cd).len))
                .collect();
            let c = self.classes.intern_counts(bits, 0, counts, self.cfg.s);
            self.touch(1);
            self.drawer_mut(d).class = c;
            match self.drawer(d).parent {
                None => {
                    self.count_root_class(old_class, -1);
                    self.count_root_class(c, 1);
                }
                Some(w) => {
                    let wr = self.recs.get_mut(&w).unwrap();
                    let i = wr
                        .pending
                        .iter()
                        .position(|&p| p == d)
                        .expect("path drawer pending");
                    wr.pending.swap_remove(i);
                    match wr.children.get(&c).copied() {
                        Some(e) => {
                            self.unlink(x);
                            self.release(d);
                            self.push_member(e, x);
                            self.touch(1);
                        }
                        None => {
                            wr.children.insert(c, d);
                        }
                    }
                }
            }
        }
    }

    /// Turns `h`, whose limb has no edge above it, into the root of a new
    /// tree.
    fn detach(&mut self, h: VertexId) {
        let w = self
            .parent(h)
            .unwrap()
            .expect("detached vertex has a parent");
        let ext = self.extract_path(w).expect("parent is present");
        let d = self.recs[&h].drawer;
        let class = self.drawer(d).class;
        if self.drawer(d).len > 1 {
            self.unlink(h);
        } else {
            self.recs.get_mut(&w).unwrap().children.remove(&class);
            self.release(d);
        }
        self.add_root(h, class);
        self.touch(1);
        self.refresh(&ext.path, None);
    }

    /// Replaces the trees over `old` by the forest `parents` over `new`.
    fn rebuild(
        &mut self,
        old: &BTreeSet<VertexId>,
        new: &BTreeSet<VertexId>,
        parents: &BTreeMap<VertexId, Option<VertexId>>,
    ) {
        for &x in old {
            if self.root_pos.contains_key(&x) {
                self.drop_root(x);
            }
            let d = self.recs[&x].drawer;
            if self.drawers[d].is_some() {
                self.release(d);
            }
        }
        for x in old {
            self.recs.remove(x);
        }

        let mut children: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        let mut depth: HashMap<VertexId, usize> = HashMap::with_capacity(new.len());
        for &x in new {
            if let Some(p) = parents[&x] {
                children.entry(p).or_default().push(x);
            }
            let mut dd = 1;
            let mut cur = x;
            while let Some(p) = parents[&cur] {
                dd += 1;
                cur = p;
            }
            depth.insert(x, dd);
        }
        let mut order: Vec<VertexId> = new.iter().copied().collect();
        order.sort_by_key(|x| std::cmp::Reverse(depth[x]));
        let mut class: HashMap<VertexId, ClassId> = HashMap::with_capacity(new.len());
        for &x in &order {
            let mut bits: Bits = 0;
            let mut anc = parents[&x];
            let mut k = 0;
            while let Some(p) = anc {
                if self.graph.has_edge(x, p) {
                    bits |= 1 << k;
                }
                anc = parents[&p];
                k += 1;
            }
            let mut counts: BTreeMap<ClassId, usize> = BTreeMap::new();
            for c in children.get(&x).into_iter().flatten() {
                *counts.entry(class[c]).or_default() += 1;
            }
            class.insert(x, self.classes.intern_counts(bits, 0, counts, self.cfg.s));
        }
        for &x in new {
            self.recs.insert(x, blank());
        }
        for &x in new {
            if parents[&x].is_none() {
                self.add_root(x, class[&x]);
            }
        }
        for (&x, ch) in &children {
            let mut groups: BTreeMap<ClassId, Vec<VertexId>> = BTreeMap::new();
            for &c in ch {
                groups.entry(class[&c]).or_default().push(c);
            }
            for (c, members) in groups {
                let d = self.alloc(Drawer {
                    head: members[0],
                    tail: members[0],
                    len: 1,
                    parent: Some(x),
                    class: c,
                });
                self.recs.get_mut(&members[0]).unwrap().drawer = d;
                for &m in &members[1..] {
                    self.push_member(d, m);
                }
                self.recs.get_mut(&x).unwrap().children.insert(c, d);
            }
        }
    }

    fn alloc(&mut self, d: Drawer) -> DrawerId {
        match self.free.pop() {
            Some(id) => {
                self.drawers[id] = Some(d);
                id
            }
            None => {
                self.drawers.push(Some(d));
                self.drawers.len() - 1
            }
        }
    }

    fn release(&mut self, d: DrawerId) {
        self.drawers[d] = None;
        self.free.push(d);
    }

    /// Removes `x` from its drawer's member list. The drawer may become
    /// empty; the caller releases it.
    fn unlink(&mut self, x: VertexId) {
        let (d, prev, next) = {
            let r = &self.recs[&x];
            (r.drawer, r.prev, r.next)
        };
        match prev {
            Some(p) => self.recs.get_mut(&p).unwrap().next = next,
            None => {
                if let Some(n) = next {
                    self.drawer_mut(d).head = n;
                }
            }
        }
        match next {
            Some(n) => self.recs.get_mut(&n).unwrap().prev = prev,
            None => {
                if let Some(p) = prev {
                    self.drawer_mut(d).tail = p;
                }
            }
        }
        self.drawer_mut(d).len -= 1;
        let r = self.recs.get_mut(&x).unwrap();
        r.prev = None;
        r.next = None;
    }

    fn push_member(&mut self, d: DrawerId, x: VertexId) {
        let tail = self.drawer(d).tail;
        self.recs.get_mut(&tail).unwrap().next = Some(x);
        {
            let r = self.recs.get_mut(&x).unwrap();
            r.prev = Some(tail);
            r.next = None;
            r.drawer = d;
        }
        let dr = self.drawer_mut(d);
        dr.tail = x;
        dr.len += 1;
    }

    fn add_root(&mut self, x: VertexId, class: ClassId) {
        let d = self.alloc(Drawer {
            head: x,
            tail: x,
            len: 1,
            parent: None,
            class,
        });
        let r = self.recs.get_mut(&x).unwrap();
        r.drawer = d;
        r.prev = None;
        r.next = None;
        self.root_pos.insert(x, self.roots.len());
        self.roots.push(x);
        self.count_root_class(class, 1);
    }

    /// Takes `x` off the root list; its drawer is left to the caller.
    fn drop_root(&mut self, x: VertexId) {
        let i = self.root_pos.remove(&x).expect("vertex is a root");
        self.roots.swap_remove(i);
        if let Some(&moved) = self.roots.get(i) {
            self.root_pos.insert(moved, i);
        }
        let c = self.drawer(self.recs[&x].drawer).class;
        self.count_root_class(c, -1);
    }

    fn count_root_class(&mut self, c: ClassId, delta: isize) {
        let n = self.root_classes.entry(c).or_default();
        *n = n
            .checked_add_signed(delta)
            .expect("root class count stays nonnegative");
        if *n == 0 {
            self.root_classes.remove(&c);
        }
    }
}

fn blank() -> VRec {
    VRec {
        drawer: usize::MAX,
        prev: None,
        next: None,
        children: BTreeMap::new(),
        pending: Vec::new(),
    }
}

/// Depth-first tree of one component from a vertex of largest degree, if
/// it is no deeper than `depth`. Depth-first trees have no cross edges, so
/// the tree is a decomposition.
fn dfs_tree(
    graph: &DynamicGraph,
    comp: &[VertexId],
    depth: usize,
) -> Option<Vec<(VertexId, Option<VertexId>)>> {
    let start = *comp
        .iter()
        .max_by_key(|&&v| (graph.degree(v), std::cmp::Reverse(v)))?;
    let mut out = vec![(start, None)];
    let mut seen = BTreeSet::from([start]);
    let mut stack: Vec<(VertexId, Vec<VertexId>)> = vec![(start, graph.neighbors(start).collect())];
    while let Some((x, todo)) = stack.last_mut() {
        let x = *x;
        match todo.pop() {
            Some(y) if seen.insert(y) => {
                if stack.len() + 1 > depth {
                    return None;
                }
                out.push((y, Some(x)));
                let n = graph.neighbors(y).collect();
                stack.push((y, n));
            }
            Some(_) => {}
            None => {
                stack.pop();
            }
        }
    }
    Some(out)
}
