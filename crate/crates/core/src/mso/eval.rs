//! Brute-force model checking: first-order quantifiers range over vertices,
//! set quantifiers over all vertex subsets.
//!
//! Formulas are compiled to an arena with de Bruijn slots. Two things keep the
//! exponential search tolerable at desk scale:
//! * a set quantifier of the shape `forallS X . ((forall z . (z in X -> c)) -> body)`
//!   (or the `existsS ... and` dual) enumerates only subsets of `{z | c}`;
//! * quantifier nodes are memoized on the values of their free slots.

use std::collections::{BTreeMap, HashMap};

use super::{ConstantAssignment, Formula, MsoError, Term};
use crate::graph::{DynamicGraph, VertexId};

pub const DEFAULT_MAX_VERTICES: usize = 16;

/// Hard limit from the `u64` subset representation.
const MASK_BITS: usize = 64;
const MEMO_SLOTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    pub max_vertices: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            max_vertices: DEFAULT_MAX_VERTICES,
        }
    }
}

#[derive(Clone, Copy)]
enum CTerm {
    Slot(u16),
    Vertex(u16),
}

#[derive(Clone, Copy)]
enum Kind {
    Edge(CTerm, CTerm),
    Eq(CTerm, CTerm),
    In(CTerm, u16),
    Not(u32),
    And(u32, u32),
    Or(u32, u32),
    Implies(u32, u32),
    Exists {
        slot: u16,
        body: u32,
    },
    Forall {
        slot: u16,
        body: u32,
    },
    SetQ {
        exists: bool,
        slot: u16,
        guard: Option<(u16, u32)>,
        body: u32,
    },
}

struct Node {
    kind: Kind,
    free: u64,
    memo: bool,
}

struct Compiler<'a> {
    nodes: Vec<Node>,
    scope: Vec<(String, bool)>,
    index: &'a BTreeMap<VertexId, u16>,
    consts: ConstantAssignment,
}

fn mentions_set(f: &Formula, set: &str) -> bool {
    use Formula::*;
    match f {
        In(_, s) => s == set,
        Edge(..) | Eq(..) => false,
        Not(g) | Exists(_, g) | Forall(_, g) => mentions_set(g, set),
        ExistsSet(v, g) | ForallSet(v, g) => v != set && mentions_set(g, set),
        And(l, r) | Or(l, r) | Implies(l, r) => mentions_set(l, set) || mentions_set(r, set),
    }
}

/// Recognizes `forall z . (z in X -> cond)`; returns `(z, cond)`.
fn subset_guard<'f>(g: &'f Formula, set: &str) -> Option<(&'f str, &'f Formula)> {
    let Formula::Forall(z, inner) = g else {
        return None;
    };
    let Formula::Implies(lhs, cond) = inner.as_ref() else {
        return None;
    };
    match lhs.as_ref() {
        Formula::In(Term::Var(t), s) if t == z && s == set && !mentions_set(cond, set) => {
            Some((z.as_str(), cond.as_ref()))
        }
        _ => None,
    }
}

impl Compiler<'_> {
    fn push(&mut self, kind: Kind, free: u64) -> u32 {
        let memo = matches!(
            kind,
            Kind::Exists { .. } | Kind::Forall { .. } | Kind::SetQ { .. }
        ) && free.count_ones() as usize <= MEMO_SLOTS;
        self.nodes.push(Node { kind, free, memo });
        (self.nodes.len() - 1) as u32
    }

    fn lookup(&self, name: &str, set: bool) -> Result<u16, MsoError> {
        self.scope
            .iter()
            .rposition(|(n, s)| n == name && *s == set)
            .map(|i| i as u16)
            .ok_or_else(|| MsoError::UnboundVariable(name.to_string()))
    }

    fn term(&self, t: &Term) -> Result<(CTerm, u64), MsoError> {
        let resolve = |c: char, v: Option<VertexId>| -> Result<(CTerm, u64), MsoError> {
            let v = v.ok_or(MsoError::UnassignedConstant(c))?;
            let i = self
                .index
                .get(&v)
                .ok_or(MsoError::ConstantOutsideStructure(c))?;
            Ok((CTerm::Vertex(*i), 0))
        };
        match t {
            Term::Var(name) => {
                let s = self.lookup(name, false)?;
                Ok((CTerm::Slot(s), 1 << s))
            }
            Term::A => resolve('a', self.consts.a),
            Term::B => resolve('b', self.consts.b),
        }
    }

    fn bind(&mut self, name: &str, set: bool) -> u16 {
        let slot = self.scope.len();
        assert!(
            slot < MASK_BITS,
            "quantifier nesting deeper than {MASK_BITS}"
        );
        self.scope.push((name.to_string(), set));
        slot as u16
    }

    fn compile(&mut self, f: &Formula) -> Result<(u32, u64), MsoError> {
        use Formula::*;
        Ok(match f {
            Edge(x, y) => {
                let (x, fx) = self.term(x)?;
                let (y, fy) = self.term(y)?;
                let free = fx | fy;
                (self.push(Kind::Edge(x, y), free), free)
            }
            Formula::Eq(x, y) => {
                let (x, fx) = self.term(x)?;
                let (y, fy) = self.term(y)?;
                let free = fx | fy;
                (self.push(Kind::Eq(x, y), free), free)
            }
            In(x, s) => {
                let (x, fx) = self.term(x)?;
                let s = self.lookup(s, true)?;
                let free = fx | (1 << s);
                (self.push(Kind::In(x, s), free), free)
            }
            Not(g) => {
                let (g, free) = self.compile(g)?;
                (self.push(Kind::Not(g), free), free)
            }
            And(l, r) | Or(l, r) | Implies(l, r) => {
                let (l, fl) = self.compile(l)?;
                let (r, fr) = self.compile(r)?;
                let free = fl | fr;
                let kind = match f {
                    And(..) => Kind::And(l, r),
                    Or(..) => Kind::Or(l, r),
                    _ => Kind::Implies(l, r),
                };
                (self.push(kind, free), free)
            }
            Exists(v, g) | Forall(v, g) => {
                let slot = self.bind(v, false);
                let body = self.compile(g);
                self.scope.pop();
                let (body, fb) = body?;
                let free = fb & !(1 << slot);
                let kind = if matches!(f, Exists(..)) {
                    Kind::Exists { slot, body }
                } else {
                    Kind::Forall { slot, body }
                };
                (self.push(kind, free), free)
            }
            ExistsSet(v, g) | ForallSet(v, g) => {
                let exists = matches!(f, ExistsSet(..));
                let slot = self.bind(v, true);
                let split = match (exists, g.as_ref()) {
                    (true, And(guard, body)) | (false, Implies(guard, body)) => {
                        subset_guard(guard, v).map(|(z, cond)| (z, cond, body.as_ref()))
                    }
                    _ => None,
                };
                let compiled = (|| -> Result<_, MsoError> {
                    match split {
                        Some((z, cond, body)) => {
                            let zslot = self.bind(z, false);
                            let c = self.compile(cond);
                            self.scope.pop();
                            let (c, fc) = c?;
                            let (b, fb) = self.compile(body)?;
                            Ok((Some((zslot, c)), b, (fc & !(1 << zslot)) | fb))
                        }
                        None => {
                            let (b, fb) = self.compile(g)?;
                            Ok((None, b, fb))
                        }
                    }
                })();
                self.scope.pop();
                let (guard, body, fb) = compiled?;
                let free = fb & !(1 << slot);
                (
                    self.push(
                        Kind::SetQ {
                            exists,
                            slot,
                            guard,
                            body,
                        },
                        free,
                    ),
                    free,
                )
            }
        })
    }
}

struct Machine {
    nodes: Vec<Node>,
    adj: Vec<u64>,
    n: usize,
    memo: HashMap<(u32, [u64; MEMO_SLOTS]), bool>,
}

impl Machine {
    fn term(&self, t: CTerm, env: &[u64]) -> u64 {
        match t {
            CTerm::Slot(s) => env[s as usize],
            CTerm::Vertex(i) => i as u64,
        }
    }

    fn key(&self, id: u32, env: &[u64]) -> (u32, [u64; MEMO_SLOTS]) {
        let mut k = [u64::MAX; MEMO_SLOTS];
        let mut free = self.nodes[id as usize].free;
        let mut i = 0;
        while free != 0 {
            let s = free.trailing_zeros() as usize;
            free &= free - 1;
            k[i] = env[s];
            i += 1;
        }
        (id, k)
    }

    fn eval(&mut self, id: u32, env: &mut [u64]) -> bool {
        let node = &self.nodes[id as usize];
        let kind = node.kind;
        let memo_key = if node.memo {
            let k = self.key(id, env);
            if let Some(&r) = self.memo.get(&k) {
                return r;
            }
            Some(k)
        } else {
            None
        };
        let r = match kind {
            Kind::Edge(x, y) => {
                let (x, y) = (self.term(x, env), self.term(y, env));
                self.adj[x as usize] >> y & 1 == 1
            }
            Kind::Eq(x, y) => self.term(x, env) == self.term(y, env),
            Kind::In(x, s) => env[s as usize] >> self.term(x, env) & 1 == 1,
            Kind::Not(g) => !self.eval(g, env),
            Kind::And(l, r) => self.eval(l, env) && self.eval(r, env),
            Kind::Or(l, r) => self.eval(l, env) || self.eval(r, env),
            Kind::Implies(l, r) => !self.eval(l, env) || self.eval(r, env),
            Kind::Exists { slot, body } => (0..self.n).any(|i| {
                env[slot as usize] = i as u64;
                self.eval(body, env)
            }),
            Kind::Forall { slot, body } => (0..self.n).all(|i| {
                env[slot as usize] = i as u64;
                self.eval(body, env)
            }),
            Kind::SetQ {
                exists,
                slot,
                guard,
                body,
            } => {
                let universe = match guard {
                    None => {
                        if self.n == 64 {
                            u64::MAX
                        } else {
                            (1u64 << self.n) - 1
                        }
                    }
                    Some((zslot, cond)) => {
                        let mut m = 0;
                        for i in 0..self.n {
                            env[zslot as usize] = i as u64;
                            if self.eval(cond, env) {
                                m |= 1 << i;
                            }
                        }
                        m
                    }
                };
                let mut sub = universe;
                loop {
                    env[slot as usize] = sub;
                    if self.eval(body, env) == exists {
                        break exists;
                    }
                    if sub == 0 {
                        break !exists;
                    }
                    sub = (sub - 1) & universe;
                }
            }
        };
        if let Some(k) = memo_key {
            self.memo.insert(k, r);
        }
        r
    }
}

fn prepare(
    graph: &DynamicGraph,
    opts: EvalOptions,
) -> Result<(BTreeMap<VertexId, u16>, Vec<u64>), MsoError> {
    let n = graph.vertex_count();
    let cap = opts.max_vertices.min(MASK_BITS);
    if n > cap {
        return Err(MsoError::TooLarge { size: n, cap });
    }
    let index: BTreeMap<VertexId, u16> = graph
        .vertices()
        .enumerate()
        .map(|(i, v)| (v, i as u16))
        .collect();
    let adj = graph
        .vertices()
        .map(|v| graph.neighbors(v).fold(0u64, |m, u| m | 1 << index[&u]))
        .collect();
    Ok((index, adj))
}

fn run(
    graph: &DynamicGraph,
    f: &Formula,
    consts: ConstantAssignment,
    opts: EvalOptions,
    bound: Option<(&str, VertexId)>,
) -> Result<bool, MsoError> {
    let (index, adj) = prepare(graph, opts)?;
    let mut c = Compiler {
        nodes: Vec::new(),
        scope: Vec::new(),
        index: &index,
        consts,
    };
    let mut env = vec![0u64; MASK_BITS];
    if let Some((name, v)) = bound {
        c.bind(name, false);
        env[0] = *index
            .get(&v)
            .ok_or(MsoError::ConstantOutsideStructure('v'))? as u64;
    }
    let (root, _) = c.compile(f)?;
    let mut m = Machine {
        nodes: c.nodes,
        adj,
        n: graph.vertex_count(),
        memo: HashMap::new(),
    };
    Ok(m.eval(root, &mut env))
}

/// Standard MSO satisfaction of a closed formula. On the empty structure `∃`
/// is false and `∀` is true.
pub fn evaluate(
    graph: &DynamicGraph,
    f: &Formula,
    consts: ConstantAssignment,
    opts: EvalOptions,
) -> Result<bool, MsoError> {
    run(graph, f, consts, opts, None)
}

/// For `f = exists v . body`, evaluates `body` with `v` fixed to `root`.
pub fn evaluate_rooted(
    graph: &DynamicGraph,
    f: &Formula,
    consts: ConstantAssignment,
    opts: EvalOptions,
    root: VertexId,
) -> Result<bool, MsoError> {
    let Formula::Exists(v, body) = f else {
        return Err(MsoError::NotExistential);
    };
    run(graph, body, consts, opts, Some((v, root)))
}
