use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TraceCommand;
use crate::graph::{DynamicGraph, VertexId};
use crate::static_core::tree_depth;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub commands: usize,
    pub vertex_cap: usize,
    pub depth: usize,
}

struct Shadow {
    g: DynamicGraph,
    named: Vec<(u64, VertexId)>,
    next: u64,
}

impl Shadow {
    fn fits(&self, u: VertexId, v: VertexId, depth: usize) -> bool {
        let mut keep = self.g.component_of(u).unwrap();
        keep.extend(self.g.component_of(v).unwrap());
        let mut h = self.g.induced(&keep);
        h.set_edge(u, v, true).unwrap();
        tree_depth(&h) <= depth
    }

    fn name(&self, v: VertexId) -> u64 {
        self.named.iter().find(|p| p.1 == v).unwrap().0
    }
}

/// A seeded command sequence over an initially empty graph. Only valid
/// commands are produced, and an edge is added only when the tree-depth
/// stays within `depth`.
pub fn fuzz_commands(cfg: &FuzzConfig) -> Vec<TraceCommand> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sh = Shadow {
        g: DynamicGraph::new(),
        named: Vec::new(),
        next: 0,
    };
    let mut out = Vec::with_capacity(cfg.commands);
    while out.len() < cfg.commands {
        let n = sh.named.len();
        let roll = rng.gen_range(0..100);
        let cmd = if n < 2 || (roll < 8 && n < cfg.vertex_cap) {
            if n >= cfg.vertex_cap {
                TraceCommand::Query
            } else {
                let v = sh.g.add_vertex();
                sh.named.push((sh.next, v));
                sh.next += 1;
                TraceCommand::AddVertex(sh.next - 1)
            }
        } else if roll < 12 {
            let isolated: Vec<usize> = (0..n).filter(|&i| sh.g.degree(sh.named[i].1) == 0).collect();
            if isolated.is_empty() {
                TraceCommand::Query
            } else {
                let i = isolated[rng.gen_range(0..isolated.len())];
                let (name, v) = sh.named.remove(i);
                sh.g.remove_vertex(v).unwrap();
                TraceCommand::DeleteVertex(name)
            }
        } else if roll < 55 {
            let mut pick = None;
            for _ in 0..8 {
                let u = sh.named[rng.gen_range(0..n)].1;
                let v = sh.named[rng.gen_range(0..n)].1;
                if u != v && !sh.g.has_edge(u, v) && sh.fits(u, v, cfg.depth) {
                    pick = Some((u, v));
                    break;
                }
            }
            match pick {
                Some((u, v)) => {
                    sh.g.set_edge(u, v, true).unwrap();
                    TraceCommand::AddEdge(sh.name(u), sh.name(v))
                }
                None => TraceCommand::Query,
            }
        } else if roll < 90 {
            let edges: Vec<(VertexId, VertexId)> = sh.g.edges().collect();
            if edges.is_empty() {
                TraceCommand::Query
            } else {
                let (u, v) = edges[rng.gen_range(0..edges.len())];
                sh.g.set_edge(u, v, false).unwrap();
                let (a, b) = (sh.name(u), sh.name(v));
                if rng.gen_bool(0.5) {
                    TraceCommand::DeleteEdge(a, b)
                } else {
                    TraceCommand::DeleteEdge(b, a)
                }
            }
        } else if roll < 97 {
            TraceCommand::Query
        } else {
            TraceCommand::Checkpoint
        };
        out.push(cmd);
    }
    out
}
