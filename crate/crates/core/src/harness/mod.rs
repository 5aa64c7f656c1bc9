//! Trace replay against the dynamic structure, with optional oracle
//! cross-checks after every command, and a seeded command generator.

mod fuzz;
mod trace;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamic::{choose_s, Counters, DynConfig, DynError, DynamicDecomposition};
use crate::graph::{DynamicGraph, VertexId};
use crate::minimal::{
    build_root_table, build_sat_table, enumerate_minimal_trees_with, CatalogCache, CatalogConfig,
    LabelAlphabet, MinimalError, ThresholdConfig, DEFAULT_CATALOG_CAP, MAX_DEPTH,
};
use crate::mso::{build_tau_prime, evaluate, parse, ConstantAssignment, EvalOptions, Formula, MsoError};
use crate::static_core::{is_valid_decomposition, tree_depth, MAX_EXACT_VERTICES};

pub use fuzz::{fuzz_commands, FuzzConfig};
pub use trace::{parse_graph, parse_trace, TraceCommand};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("verification failed at command {index} (state {digest}): {detail}")]
    Verification {
        index: usize,
        digest: String,
        detail: String,
    },
}

impl HarnessError {
    /// 1 for a failed check, 2 for bad input or configuration, 3 for an
    /// exhausted budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Verification { .. } => 1,
            HarnessError::Parse { .. } | HarnessError::Io(_) | HarnessError::Config(_) => 2,
            HarnessError::Budget(_) => 3,
        }
    }
}

fn is_budget(e: &DynError) -> bool {
    matches!(
        e,
        DynError::KernelTooLarge { .. }
            | DynError::Eval(MsoError::TooLarge { .. })
            | DynError::Minimal(
                MinimalError::CatalogBudgetExceeded { .. }
                    | MinimalError::ValidationBudgetExceeded { .. }
                    | MinimalError::Mso(MsoError::TooLarge { .. })
            )
    )
}

impl From<DynError> for HarnessError {
    fn from(e: DynError) -> Self {
        if is_budget(&e) {
            HarnessError::Budget(e.to_string())
        } else {
            HarnessError::Config(e.to_string())
        }
    }
}

impl From<MinimalError> for HarnessError {
    fn from(e: MinimalError) -> Self {
        DynError::Minimal(e).into()
    }
}

/// Short name of an error, as written to reports.
pub fn error_kind(e: &DynError) -> &'static str {
    match e {
        DynError::NotPresent(_) => "NotPresent",
        DynError::NoSuchEdge(..) => "NoSuchEdge",
        DynError::EdgeExists(..) => "EdgeExists",
        DynError::NotIsolated(_) => "NotIsolated",
        DynError::SelfLoop(_) => "SelfLoop",
        DynError::DepthExceeded(_) => "DepthExceeded",
        DynError::DepthWouldExceed(..) => "DepthWouldExceed",
        DynError::Infeasible(_) => "Infeasible",
        DynError::NoRootWitness { .. } => "NoRootWitness",
        DynError::KernelTooLarge { .. } => "KernelTooLarge",
        DynError::InvalidDepth(_) => "InvalidDepth",
        DynError::Eval(_) => "Eval",
        DynError::Minimal(_) => "Minimal",
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub depth: usize,
    /// Query formula in the MSO grammar.
    pub formula: String,
    pub verify: bool,
    pub catalog_cache: Option<PathBuf>,
    /// Most trees the catalog may hold.
    pub budget_catalog: usize,
    /// Most vertices any formula evaluation may see.
    pub budget_eval: usize,
    pub threshold: ThresholdConfig,
}

impl RunConfig {
    pub fn new(depth: usize, formula: &str) -> Self {
        Self {
            depth,
            formula: formula.to_string(),
            verify: false,
            catalog_cache: None,
            budget_catalog: DEFAULT_CATALOG_CAP,
            budget_eval: crate::mso::DEFAULT_MAX_VERTICES,
            threshold: ThresholdConfig::default(),
        }
    }
}

/// Everything derived from the formula and depth before any graph is seen.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub phi: Formula,
    pub s: usize,
    /// Catalog at the validation depth, with its root and truth tables.
    pub cache: CatalogCache,
    pub from_cache: bool,
}

/// Parses the formula, picks `S` and builds the catalog, or loads all of it
/// from the cache file when that was built for the same depth and formula.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared, HarnessError> {
    if cfg.depth == 0 || cfg.depth > MAX_DEPTH {
        return Err(HarnessError::Config(format!(
            "depth must lie in 1..={MAX_DEPTH}, got {}",
            cfg.depth
        )));
    }
    let phi = parse(&cfg.formula).map_err(|e| HarnessError::Config(format!("formula: {e}")))?;
    if phi.uses_constants() != (false, false) {
        return Err(HarnessError::Config("the query formula may not use constants".into()));
    }
    let tau = build_tau_prime(cfg.depth).map_err(DynError::from)?;
    let formulas = vec![tau.to_string(), phi.to_string()];
    if let Some(path) = &cfg.catalog_cache {
        if path.exists() {
            let cache = CatalogCache::load(path)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
            if cache.formulas == formulas {
                return Ok(Prepared {
                    phi,
                    s: cache.s,
                    cache,
                    from_cache: true,
                });
            }
        }
    }
    let s = choose_s(cfg.depth, &phi, cfg.threshold)?;
    let vdepth = cfg.depth.min(cfg.threshold.validation_depth).max(1);
    let catalog = enumerate_minimal_trees_with(
        vdepth,
        s,
        &LabelAlphabet::full(vdepth)?,
        CatalogConfig {
            max_trees: cfg.budget_catalog,
            max_vertices: None,
        },
    )?;
    let roots = build_root_table(&catalog, vdepth)?;
    let sat = build_sat_table(&catalog, &phi)?;
    let cache = CatalogCache::new(formulas, catalog, roots, vec![sat]);
    if let Some(path) = &cfg.catalog_cache {
        cache.save(path).map_err(|e| HarnessError::Io(e.to_string()))?;
    }
    Ok(Prepared {
        phi,
        s,
        cache,
        from_cache: false,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterRecord {
    pub cabinets_touched: usize,
    pub reroot_depth: usize,
    pub path_length: usize,
}

impl From<Counters> for CounterRecord {
    fn from(c: Counters) -> Self {
        Self {
            cabinets_touched: c.cabinets_touched,
            reroot_depth: c.reroot_depth,
            path_length: c.path_length,
        }
    }
}

/// One line of a run report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub index: usize,
    pub command: String,
    /// `ok`, or the kind of error the command was rejected with.
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<bool>,
    pub counters: CounterRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
}

impl Record {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// A live structure driven by trace commands.
pub struct Session {
    d: DynamicDecomposition,
    names: BTreeMap<u64, VertexId>,
    verify: bool,
    oracle: EvalOptions,
    index: usize,
}

impl Session {
    /// Builds the structure over the initial edge list.
    pub fn start(
        cfg: &RunConfig,
        prepared: &Prepared,
        edges: &[(u64, u64)],
    ) -> Result<Self, HarnessError> {
        let named: BTreeSet<u64> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        let mut g = DynamicGraph::new();
        let names: BTreeMap<u64, VertexId> = named.into_iter().map(|n| (n, g.add_vertex())).collect();
        for &(u, v) in edges {
            g.set_edge(names[&u], names[&v], true)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        let oracle = EvalOptions {
            max_vertices: cfg.budget_eval,
        };
        let dcfg = DynConfig {
            eval: oracle,
            ..DynConfig::new(cfg.depth, prepared.s)
        };
        let d = DynamicDecomposition::initialize(&g, dcfg, prepared.phi.clone()).map_err(
            |e| match e {
                DynError::DepthExceeded(d) => {
                    HarnessError::Config(format!("initial graph has tree-depth above {d}"))
                }
                e => e.into(),
            },
        )?;
        let s = Self {
            d,
            names,
            verify: cfg.verify,
            oracle,
            index: 0,
        };
        if s.verify {
            s.check_state(None)?;
        }
        Ok(s)
    }

    pub fn structure(&self) -> &DynamicDecomposition {
        &self.d
    }

    /// The vertex behind a trace id.
    pub fn vertex(&self, name: u64) -> Option<VertexId> {
        self.names.get(&name).copied()
    }

    fn fail(&self, detail: String) -> HarnessError {
        HarnessError::Verification {
            index: self.index,
            digest: self.d.digest(),
            detail,
        }
    }

    fn check_state(&self, rejected: Option<&str>) -> Result<(), HarnessError> {
        self.d.check_invariants().map_err(|e| self.fail(e))?;
        let forest = self.d.decompress();
        let ok = is_valid_decomposition(self.d.graph(), &forest, self.d.config().depth)
            .map_err(|e| self.fail(e.to_string()))?;
        if !ok {
            return Err(self.fail("decompression is not a valid decomposition".into()));
        }
        let n = self.d.graph().vertex_count();
        if n > self.oracle.max_vertices {
            return Err(HarnessError::Budget(format!(
                "oracle evaluation on {n} vertices exceeds {}",
                self.oracle.max_vertices
            )));
        }
        let want = evaluate(self.d.graph(), self.d.formula(), ConstantAssignment::none(), self.oracle)
            .map_err(|e| HarnessError::Budget(e.to_string()))?;
        if want != self.d.query() {
            return Err(self.fail(format!(
                "query answered {} but the formula is {want}",
                self.d.query()
            )));
        }
        if let Some(kind) = rejected {
            if kind == "NoRootWitness" || kind == "Infeasible" {
                return Err(self.fail(format!("structure reported {kind}")));
            }
        }
        Ok(())
    }

    /// Whether adding `uv` keeps the tree-depth within the bound, decided on
    /// the components of the endpoints.
    fn insert_allowed(&self, u: VertexId, v: VertexId) -> Result<bool, HarnessError> {
        let g = self.d.graph();
        let mut keep = g.component_of(u).map_err(|e| self.fail(e.to_string()))?;
        keep.extend(g.component_of(v).map_err(|e| self.fail(e.to_string()))?);
        if keep.len() > MAX_EXACT_VERTICES {
            return Err(HarnessError::Budget(format!(
                "exact tree-depth on {} vertices",
                keep.len()
            )));
        }
        let mut h = g.induced(&keep);
        h.set_edge(u, v, true).map_err(|e| self.fail(e.to_string()))?;
        Ok(tree_depth(&h) <= self.d.config().depth)
    }

    fn lookup(&self, name: u64) -> Result<VertexId, (&'static str, String)> {
        self.vertex(name)
            .ok_or(("UnknownVertex", format!("no vertex named {name}")))
    }

    /// Applies one command and returns its report line.
    pub fn apply(&mut self, cmd: TraceCommand) -> Result<Record, HarnessError> {
        let before = self.verify.then(|| self.d.digest());
        let mut query = None;
        let mut digest = None;
        let mut quiet = false;
        let mut allowed = None;
        let mut budget = None;
        let res: Result<(), (&'static str, String)> = (|| {
            let wrap = |e: DynError| {
                if is_budget(&e) {
                    budget = Some(e.to_string());
                }
                (error_kind(&e), e.to_string())
            };
            match cmd {
                TraceCommand::AddVertex(n) => {
                    if self.names.contains_key(&n) {
                        return Err(("IdInUse", format!("vertex {n} already exists")));
                    }
                    let v = self.d.add_isolated_vertex().map_err(wrap)?;
                    self.names.insert(n, v);
                }
                TraceCommand::DeleteVertex(n) => {
                    let v = self.lookup(n)?;
                    self.d.remove_isolated_vertex(v).map_err(wrap)?;
                    self.names.remove(&n);
                }
                TraceCommand::AddEdge(a, b) => {
                    let (u, v) = (self.lookup(a)?, self.lookup(b)?);
                    if self.verify && u != v && !self.d.graph().has_edge(u, v) {
                        allowed = Some(self.insert_allowed(u, v));
                    }
                    self.d.insert_edge(u, v).map_err(wrap)?;
                }
                TraceCommand::DeleteEdge(a, b) => {
                    let (u, v) = (self.lookup(a)?, self.lookup(b)?);
                    self.d.delete_edge(u, v).map_err(wrap)?;
                }
                TraceCommand::Query => {
                    query = Some(self.d.query());
                    quiet = true;
                }
                TraceCommand::Checkpoint => {
                    digest = Some(self.d.digest());
                    quiet = true;
                }
            }
            Ok(())
        })();
        let counters = if quiet {
            CounterRecord::default()
        } else {
            self.d.last_counters().into()
        };
        let (outcome, error) = match &res {
            Ok(()) => ("ok".to_string(), None),
            Err((kind, msg)) => (kind.to_string(), Some(msg.clone())),
        };
        if let Some(msg) = budget {
            return Err(HarnessError::Budget(msg));
        }
        let mut oracle = None;
        if self.verify {
            let allowed = allowed.transpose()?;
            if res.is_err() && before.as_deref() != Some(&self.d.digest()) {
                return Err(self.fail(format!("rejected {cmd} changed the state")));
            }
            match (&res, allowed) {
                (Err(_), Some(true)) => {
                    return Err(self.fail(format!("{cmd} was rejected but fits the depth bound")))
                }
                (Ok(()), Some(false)) => {
                    return Err(self.fail(format!("{cmd} was accepted past the depth bound")))
                }
                _ => {}
            }
            self.check_state(res.as_ref().err().map(|e| e.0))?;
            oracle = Some("agree".to_string());
        }
        let rec = Record {
            index: self.index,
            command: cmd.to_string(),
            outcome,
            error,
            query,
            counters,
            oracle,
            digest,
        };
        self.index += 1;
        Ok(rec)
    }
}

/// Summary of a finished run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub commands: usize,
    pub rejected: usize,
    pub s: usize,
    pub from_cache: bool,
}

/// Replays `commands` from the initial edge list, handing each record to
/// `sink` as soon as it exists.
pub fn run(
    cfg: &RunConfig,
    edges: &[(u64, u64)],
    commands: &[TraceCommand],
    mut sink: impl FnMut(&Record),
) -> Result<RunSummary, HarnessError> {
    let prepared = prepare(cfg)?;
    let mut session = Session::start(cfg, &prepared, edges)?;
    let mut summary = RunSummary {
        s: prepared.s,
        from_cache: prepared.from_cache,
        ..RunSummary::default()
    };
    for &cmd in commands {
        let rec = session.apply(cmd)?;
        summary.commands += 1;
        if rec.outcome != "ok" {
            summary.rejected += 1;
        }
        sink(&rec);
    }
    Ok(summary)
}

/// Per-command maxima over a stream of records, by command keyword.
pub fn counter_maxima<'a>(records: impl IntoIterator<Item = &'a Record>) -> HashMap<String, CounterRecord> {
    let mut out: HashMap<String, CounterRecord> = HashMap::new();
    for r in records {
        let kw = r.command.split_whitespace().next().unwrap_or("").to_string();
        let m = out.entry(kw).or_default();
        m.cabinets_touched = m.cabinets_touched.max(r.counters.cabinets_touched);
        m.reroot_depth = m.reroot_depth.max(r.counters.reroot_depth);
        m.path_length = m.path_length.max(r.counters.path_length);
    }
    out
}
