//! The dynamic structure: a compressed tree-depth decomposition kept under
//! edge and isolated-vertex updates, with a cached answer for one MSO
//! formula.
//!
//! Every graph vertex has a record. Siblings whose limbs have the same
//! `S`-capped class share a drawer, which owns the single parent link for
//! all of them. Cabinets are not stored; they are the classes seen from the
//! first member of each drawer.

mod classes;
mod kernel;
mod ops;
mod scratch;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{DynamicGraph, GraphError, VertexId};
use crate::minimal::{compute_limb_threshold, Bits, LabelAlphabet, MinimalError, ThresholdConfig};
use crate::mso::{build_tau_prime, evaluate, ConstantAssignment, EvalOptions, Formula, MsoError};
use crate::static_core::RootedForest;

pub use classes::{ClassId, ClassInfo, LabelKey};
pub use ops::Extraction;

use classes::Interner;
use kernel::{Kernel, RootMemo};

pub type DrawerId = usize;

/// Largest kernel handed to the exact root oracle.
pub const DEFAULT_KERNEL_CAP: usize = 40;

/// Components at most this large are decomposed exactly on initialization.
pub const EXACT_INIT_VERTICES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynError {
    #[error("vertex {0} is not present")]
    NotPresent(VertexId),
    #[error("no edge between {0} and {1}")]
    NoSuchEdge(VertexId, VertexId),
    #[error("edge between {0} and {1} already present")]
    EdgeExists(VertexId, VertexId),
    #[error("vertex {0} still has incident edges")]
    NotIsolated(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("graph has tree-depth above {0}")]
    DepthExceeded(usize),
    #[error("inserting {0}-{1} would push tree-depth above the bound")]
    DepthWouldExceed(VertexId, VertexId),
    #[error("no root of depth at most {0}")]
    Infeasible(usize),
    #[error("chosen root admits no decomposition below level {level}")]
    NoRootWitness { level: usize },
    #[error("kernel of {size} vertices exceeds cap {cap}")]
    KernelTooLarge { size: usize, cap: usize },
    #[error("depth bound {0} out of range")]
    InvalidDepth(usize),
    #[error(transparent)]
    Eval(#[from] MsoError),
    #[error(transparent)]
    Minimal(#[from] MinimalError),
}

impl From<GraphError> for DynError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::NotPresent(v) => DynError::NotPresent(v),
            GraphError::NotIsolated(v) => DynError::NotIsolated(v),
            GraphError::SelfLoop(v) => DynError::SelfLoop(v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DynConfig {
    pub depth: usize,
    /// Multiplicity cap for limb classes.
    pub s: usize,
    pub kernel_cap: usize,
    pub eval: EvalOptions,
}

impl DynConfig {
    pub fn new(depth: usize, s: usize) -> Self {
        Self {
            depth,
            s,
            kernel_cap: DEFAULT_KERNEL_CAP,
            eval: EvalOptions { max_vertices: 64 },
        }
    }
}

/// The `S` used for depth bound `depth` and query `phi`: the larger of the
/// validated thresholds of `τ′_t` for `t ≤ depth` and of `phi`.
pub fn choose_s(depth: usize, phi: &Formula, cfg: ThresholdConfig) -> Result<usize, DynError> {
    if depth == 0 || depth > crate::minimal::MAX_DEPTH {
        return Err(DynError::InvalidDepth(depth));
    }
    let alphabet = LabelAlphabet::full(depth)?;
    let mut s = compute_limb_threshold(phi, &alphabet, depth, cfg)?.s;
    for t in 1..=depth {
        s = s.max(compute_limb_threshold(&build_tau_prime(t)?, &alphabet, depth, cfg)?.s);
    }
    Ok(s)
}

/// Work done by the last operation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub cabinets_touched: usize,
    pub reroot_depth: usize,
    pub path_length: usize,
}

#[derive(Clone, Debug)]
struct VRec {
    drawer: DrawerId,
    prev: Option<VertexId>,
    next: Option<VertexId>,
    /// Clean child drawers, one per class.
    children: BTreeMap<ClassId, DrawerId>,
    /// Child drawers split off by an extraction and not yet cleaned.
    pending: Vec<DrawerId>,
}

#[derive(Clone, Debug)]
struct Drawer {
    head: VertexId,
    tail: VertexId,
    len: usize,
    parent: Option<VertexId>,
    class: ClassId,
}

/// A drawer as seen from outside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DrawerView {
    pub members: Vec<VertexId>,
    pub parent: Option<VertexId>,
    pub class: ClassId,
}

pub struct DynamicDecomposition {
    cfg: DynConfig,
    phi: Formula,
    graph: DynamicGraph,
    recs: HashMap<VertexId, VRec>,
    drawers: Vec<Option<Drawer>>,
    free: Vec<DrawerId>,
    roots: Vec<VertexId>,
    root_pos: HashMap<VertexId, usize>,
    root_classes: HashMap<ClassId, usize>,
    classes: Interner,
    roots_memo: RootMemo,
    answers: HashMap<Vec<(ClassId, u32)>, bool>,
    answer: bool,
    last: Counters,
}

impl DynamicDecomposition {
    /// Empty structure.
    pub fn new(cfg: DynConfig, phi: Formula) -> Result<Self, DynError> {
        if cfg.depth == 0 || cfg.depth > crate::minimal::MAX_DEPTH {
            return Err(DynError::InvalidDepth(cfg.depth));
        }
        let mut d = Self {
            cfg,
            phi,
            graph: DynamicGraph::new(),
            recs: HashMap::new(),
            drawers: Vec::new(),
            free: Vec::new(),
            roots: Vec::new(),
            root_pos: HashMap::new(),
            root_classes: HashMap::new(),
            classes: Interner::default(),
            roots_memo: RootMemo::default(),
            answers: HashMap::new(),
            answer: false,
            last: Counters::default(),
        };
        d.refresh_answer()?;
        Ok(d)
    }

    pub fn config(&self) -> DynConfig {
        self.cfg
    }

    pub fn formula(&self) -> &Formula {
        &self.phi
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    /// Cached answer to the formula. Touches nothing.
    pub fn query(&self) -> bool {
        self.answer
    }

    pub fn last_counters(&self) -> Counters {
        self.last
    }

    pub fn roots(&self) -> &[VertexId] {
        &self.roots
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.recs.contains_key(&v)
    }

    pub fn class_info(&self, c: ClassId) -> &ClassInfo {
        self.classes.info(c)
    }

    /// Number of classes interned so far, marked ones included.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, v: VertexId) -> Result<ClassId, DynError> {
        Ok(self.drawer(self.rec(v)?.drawer).class)
    }

    pub fn parent(&self, v: VertexId) -> Result<Option<VertexId>, DynError> {
        Ok(self.drawer(self.rec(v)?.drawer).parent)
    }

    pub fn drawer_of(&self, v: VertexId) -> Result<DrawerView, DynError> {
        let id = self.rec(v)?.drawer;
        Ok(self.view(id))
    }

    /// Child drawers of `v`, in class order.
    pub fn child_drawers(&self, v: VertexId) -> Result<Vec<DrawerView>, DynError> {
        let r = self.rec(v)?;
        Ok(r.children
            .values()
            .chain(&r.pending)
            .map(|&d| self.view(d))
            .collect())
    }

    /// Whether some drawer awaits cleaning.
    pub fn is_dirty(&self) -> bool {
        self.recs.values().any(|r| !r.pending.is_empty())
    }

    /// Number of cabinets: each root, plus one per child drawer of the first
    /// member of every drawer reached.
    pub fn cabinet_count(&self) -> usize {
        let mut n = 0;
        let mut stack: Vec<VertexId> = self.roots.clone();
        while let Some(x) = stack.pop() {
            n += 1;
            let r = &self.recs[&x];
            for &d in r.children.values().chain(&r.pending) {
                stack.push(self.drawer(d).head);
            }
        }
        n
    }

    /// Multiset of `(class, drawer size)` over all drawers.
    pub fn drawer_profile(&self) -> BTreeMap<(LabelKey, usize), usize> {
        let mut out = BTreeMap::new();
        for d in self.drawers.iter().flatten() {
            let key = self.classes.info(d.class).key.clone();
            *out.entry((key, d.len)).or_default() += 1;
        }
        out
    }

    /// The full decomposition, every drawer expanded.
    pub fn decompress(&self) -> RootedForest {
        let parent: BTreeMap<VertexId, Option<VertexId>> = self
            .recs
            .iter()
            .map(|(&v, r)| (v, self.drawer(r.drawer).parent))
            .collect();
        RootedForest::from_parents(parent, self.cfg.depth).expect("drawer links form a forest")
    }

    /// Depth of `v` in the decomposition, 1 for roots.
    pub fn depth_of(&self, v: VertexId) -> Result<usize, DynError> {
        let mut d = 1;
        let mut cur = v;
        while let Some(p) = self.parent(cur)? {
            d += 1;
            cur = p;
        }
        Ok(d)
    }

    /// SHA-256 over the graph and the decomposition, in a fixed order.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (u, v) in self.graph.edges() {
            h.update(format!("e{u},{v};"));
        }
        let mut vs: Vec<&VertexId> = self.recs.keys().collect();
        vs.sort();
        for v in vs {
            let d = self.drawer(self.recs[v].drawer);
            let p = d.parent.map_or(-1, |p| p.0 as i64);
            h.update(format!("v{v},{p},{},{};", d.class, d.head));
        }
        for r in &self.roots {
            h.update(format!("r{r};"));
        }
        hex::encode(h.finalize())
    }

    /// Full recomputation check of drawers, labels and cached data.
    pub fn check_invariants(&self) -> Result<(), String> {
        let forest = self.decompress();
        let depth = |v: VertexId| forest.depth_of(v);
        let mut ch: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for v in forest.vertices() {
            if let Some(p) = forest.parent(v) {
                ch.entry(p).or_default().push(v);
            }
        }
        let mut order: Vec<VertexId> = forest.vertices().collect();
        order.sort_by_key(|&v| std::cmp::Reverse(depth(v)));
        let mut expect: HashMap<VertexId, ClassId> = HashMap::new();
        for &v in &order {
            if depth(v) > self.cfg.depth {
                return Err(format!("vertex {v} deeper than {}", self.cfg.depth));
            }
            let mut bits: Bits = 0;
            let mut anc = forest.parent(v);
            let mut k = 0;
            while let Some(p) = anc {
                if self.graph.has_edge(v, p) {
                    bits |= 1 << k;
                }
                anc = forest.parent(p);
                k += 1;
            }
            let mut counts: BTreeMap<ClassId, usize> = BTreeMap::new();
            for c in ch.get(&v).into_iter().flatten() {
                *counts.entry(expect[c]).or_default() += 1;
            }
            let mut children: Vec<(ClassId, u32)> = counts
                .into_iter()
                .map(|(c, n)| (c, n.min(self.cfg.s) as u32))
                .collect();
            children.sort_unstable();
            let key = LabelKey {
                bits,
                marks: 0,
                children,
            };
            let actual = self.class_of(v).unwrap();
            if self.classes.info(actual).key != key {
                return Err(format!("label of {v} is stale"));
            }
            expect.insert(v, actual);
            let r = &self.recs[&v];
            if !r.pending.is_empty() {
                return Err(format!("{v} has dirty child drawers"));
            }
            let mut seen = 0;
            for (&c, &d) in &r.children {
                let dr = self.drawer(d);
                if dr.class != c || dr.parent != Some(v) {
                    return Err(format!("child drawer {d} of {v} misfiled"));
                }
                let members = self.members(d);
                if members.len() != dr.len || dr.len == 0 {
                    return Err(format!("drawer {d} has a wrong cardinality"));
                }
                if members.iter().any(|m| self.recs[m].drawer != d) {
                    return Err(format!("drawer {d} has a foreign member"));
                }
                seen += dr.len;
            }
            if seen != ch.get(&v).map_or(0, |c| c.len()) {
                return Err(format!("children of {v} not all filed"));
            }
        }
        let mut root_classes: HashMap<ClassId, usize> = HashMap::new();
        for (i, &r) in self.roots.iter().enumerate() {
            if self.root_pos.get(&r) != Some(&i) || self.parent(r).unwrap().is_some() {
                return Err(format!("root list broken at {r}"));
            }
            let d = self.drawer(self.recs[&r].drawer);
            if d.len != 1 {
                return Err(format!("root {r} shares a drawer"));
            }
            *root_classes.entry(d.class).or_default() += 1;
        }
        if forest.roots().len() != self.roots.len() || root_classes != self.root_classes {
            return Err("root summary is stale".into());
        }
        let live = self.drawers.iter().flatten().count();
        if live + self.free.len() != self.drawers.len() {
            return Err("drawer slab leaks".into());
        }
        if self.answers.get(&self.answer_key()).copied() != Some(self.answer) {
            return Err("cached answer is stale".into());
        }
        Ok(())
    }

    fn rec(&self, v: VertexId) -> Result<&VRec, DynError> {
        self.recs.get(&v).ok_or(DynError::NotPresent(v))
    }

    fn drawer(&self, d: DrawerId) -> &Drawer {
        self.drawers[d].as_ref().expect("live drawer")
    }

    fn drawer_mut(&mut self, d: DrawerId) -> &mut Drawer {
        self.drawers[d].as_mut().expect("live drawer")
    }

    fn view(&self, d: DrawerId) -> DrawerView {
        let dr = self.drawer(d);
        DrawerView {
            members: self.members(d),
            parent: dr.parent,
            class: dr.class,
        }
    }

    fn members(&self, d: DrawerId) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(self.drawer(d).len);
        let mut cur = Some(self.drawer(d).head);
        while let Some(x) = cur {
            out.push(x);
            cur = self.recs[&x].next;
        }
        out
    }

    fn answer_key(&self) -> Vec<(ClassId, u32)> {
        let mut key: Vec<(ClassId, u32)> = self
            .root_classes
            .iter()
            .map(|(&c, &n)| (c, n.min(self.cfg.s) as u32))
            .collect();
        key.sort_unstable();
        key
    }

    /// Recomputes the cached answer from the multiset of root classes.
    fn refresh_answer(&mut self) -> Result<(), DynError> {
        let key = self.answer_key();
        if let Some(&a) = self.answers.get(&key) {
            self.answer = a;
            return Ok(());
        }
        let mut k = Kernel::new();
        for &(c, n) in &key {
            for _ in 0..n {
                k.expand(&self.classes, c, 0);
            }
        }
        let (g, _) = k.graph();
        let a = evaluate(&g, &self.phi, ConstantAssignment::none(), self.cfg.eval)?;
        self.answers.insert(key, a);
        self.answer = a;
        Ok(())
    }
}

/// All vertices of the trees containing `seeds`.
fn tree_vertices(d: &DynamicDecomposition, seeds: &[VertexId]) -> BTreeSet<VertexId> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<VertexId> = Vec::new();
    for &s in seeds {
        let mut r = s;
        while let Some(p) = d.drawer(d.recs[&r].drawer).parent {
            r = p;
        }
        if out.insert(r) {
            stack.push(r);
        }
    }
    while let Some(x) = stack.pop() {
        let rec = &d.recs[&x];
        for &dr in rec.children.values().chain(&rec.pending) {
            for m in d.members(dr) {
                if out.insert(m) {
                    stack.push(m);
                }
            }
        }
    }
    out
}
