//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use tdd_core::dynamic::{choose_s, DynConfig, DynamicDecomposition};
use tdd_core::graph::DynamicGraph;
use tdd_core::harness::{fuzz_commands, run, FuzzConfig, Record, RunConfig};
use tdd_core::minimal::{
    enumerate_minimal_trees, verify_limb_threshold, EnumerationBound, LabelAlphabet,
    ThresholdConfig,
};
use tdd_core::mso::{
    build_gamma, build_tau, build_tau_prime, evaluate, parse, ConstantAssignment, EvalOptions,
};
use tdd_core::static_core::{connected_graphs_up_to_iso, tree_depth};

const DOMINATING: &str = "exists x . forall y . (x = y or edge(x,y))";
const FUZZ_DEPTH: usize = 3;
const FUZZ_SEEDS: u64 = 20;
const FUZZ_LEN: usize = 500;
const C1: usize = 7;

type Outcome = Result<String, String>;

struct FuzzRuns {
    /// Per formula: records of every run, or the first error.
    runs: Vec<(String, Result<Vec<Record>, String>)>,
}

fn fuzz_runs() -> FuzzRuns {
    let formulas = [build_gamma().to_string(), DOMINATING.to_string()];
    let runs = formulas
        .into_iter()
        .map(|phi| {
            let mut all = Vec::new();
            for seed in 0..FUZZ_SEEDS {
                let cmds = fuzz_commands(&FuzzConfig {
                    seed,
                    commands: FUZZ_LEN,
                    vertex_cap: 10,
                    depth: FUZZ_DEPTH,
                });
                let mut cfg = RunConfig::new(FUZZ_DEPTH, &phi);
                cfg.verify = true;
                if let Err(e) = run(&cfg, &[], &cmds, |r| all.push(r.clone())) {
                    return (phi, Err(format!("seed {seed}: {e}")));
                }
            }
            (phi, Ok(all))
        })
        .collect();
    FuzzRuns { runs }
}

fn keyword(r: &Record) -> &str {
    r.command.split_whitespace().next().unwrap_or("")
}

fn validity(f: &FuzzRuns) -> Outcome {
    let mut total = 0;
    for (phi, res) in &f.runs {
        let recs = res.as_ref().map_err(|e| format!("{phi}: {e}"))?;
        if let Some(r) = recs.iter().find(|r| r.oracle.as_deref() != Some("agree")) {
            return Err(format!("{phi}: command {} unchecked", r.index));
        }
        total += recs.len();
    }
    Ok(format!("{total} verified commands, n <= 10, D = {FUZZ_DEPTH}"))
}

fn query_equivalence(f: &FuzzRuns) -> Outcome {
    let mut parts = Vec::new();
    for (phi, res) in &f.runs {
        let recs = res.as_ref().map_err(|e| format!("{phi}: {e}"))?;
        let queries = recs.iter().filter(|r| r.query.is_some()).count();
        let yes = recs.iter().filter(|r| r.query == Some(true)).count();
        if queries == 0 || yes == 0 || yes == queries {
            return Err(format!("{phi}: degenerate query mix {yes}/{queries}"));
        }
        parts.push(format!("{queries} queries ({yes} true)"));
    }
    Ok(format!("100% agreement: {}", parts.join(", ")))
}

fn work_bounds(f: &FuzzRuns) -> Outcome {
    let (mut del, mut reroot, mut query) = (0, 0, 0);
    for (phi, res) in &f.runs {
        let recs = res.as_ref().map_err(|e| format!("{phi}: {e}"))?;
        for r in recs {
            match keyword(r) {
                "dele" => del = del.max(r.counters.cabinets_touched),
                "adde" => reroot = reroot.max(r.counters.reroot_depth),
                "query" => query = query.max(r.counters.cabinets_touched),
                _ => {}
            }
        }
    }
    let detail = format!(
        "max delete touches {del} (bound {}), max reroot depth {reroot} (bound {FUZZ_DEPTH}), max query touches {query}",
        C1 * FUZZ_DEPTH
    );
    if del <= C1 * FUZZ_DEPTH && reroot <= FUZZ_DEPTH && query == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn path_formula() -> Outcome {
    for n in 1..=64usize {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        let (g, _) = DynamicGraph::from_edges(n, &edges);
        let expect = (usize::BITS - n.leading_zeros()) as usize;
        let got = tree_depth(&g);
        if got != expect {
            return Err(format!("P_{n}: tree_depth {got}, expected {expect}"));
        }
    }
    Ok("exact for 1 <= n <= 64".into())
}

fn tau_agreement() -> Outcome {
    let taus: Vec<_> = (1..=4).map(|d| build_tau(d).unwrap()).collect();
    let mut checked = 0;
    for n in 1..=6 {
        for edges in connected_graphs_up_to_iso(n) {
            let (g, _) = DynamicGraph::from_edges(n, &edges);
            let td = tree_depth(&g);
            for (i, tau) in taus.iter().enumerate() {
                let d = i + 1;
                let got = evaluate(&g, tau, ConstantAssignment::none(), EvalOptions::default())
                    .map_err(|e| e.to_string())?;
                if got != (td <= d) {
                    return Err(format!("n = {n}, edges {edges:?}, d = {d}: tau {got}, td {td}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (graph, d) pairs agree"))
}

fn star(n: usize) -> DynamicGraph {
    let edges: Vec<(usize, usize)> = (1..=n).map(|i| (0, i)).collect();
    DynamicGraph::from_edges(n + 1, &edges).0
}

/// Median time of one add+remove of an isolated vertex, in nanoseconds.
fn add_vertex_ns(d: &mut DynamicDecomposition) -> f64 {
    const BATCH: usize = 200;
    let mut samples: Vec<f64> = (0..41)
        .map(|_| {
            let t = Instant::now();
            for _ in 0..BATCH {
                let v = d.add_isolated_vertex().unwrap();
                d.remove_isolated_vertex(v).unwrap();
            }
            t.elapsed().as_nanos() as f64 / BATCH as f64
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    samples[samples.len() / 2]
}

fn size_independence() -> Outcome {
    let phi = build_gamma();
    let mut decs = Vec::new();
    for n in [10, 1_000, 100_000] {
        let d = DynamicDecomposition::initialize(&star(n), DynConfig::new(2, 2), phi.clone())
            .map_err(|e| format!("K_1,{n}: {e}"))?;
        if d.cabinet_count() != 2 {
            return Err(format!("K_1,{n}: {} cabinets", d.cabinet_count()));
        }
        decs.push(d);
    }
    let mut small = decs.swap_remove(0);
    let mut large = decs.pop().unwrap();
    add_vertex_ns(&mut small);
    add_vertex_ns(&mut large);
    let (a, b) = (add_vertex_ns(&mut small), add_vertex_ns(&mut large));
    let detail = format!("2 cabinets each; add vertex {a:.0} ns at n = 10, {b:.0} ns at n = 10^5");
    if b <= 2.0 * a {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn threshold_validation() -> Outcome {
    let bound = EnumerationBound {
        depth: 2,
        alphabet: LabelAlphabet::full(3).unwrap(),
        max_vertices: ThresholdConfig::default().max_vertices,
    };
    let users = [build_gamma(), parse(DOMINATING).unwrap()];
    let mut s = 0;
    for phi in &users {
        s = s.max(choose_s(FUZZ_DEPTH, phi, ThresholdConfig::default()).map_err(|e| e.to_string())?);
    }
    let mut formulas: Vec<_> = (1..=FUZZ_DEPTH).map(|t| build_tau_prime(t).unwrap()).collect();
    formulas.extend(users);
    for phi in &formulas {
        if !verify_limb_threshold(s, phi, &bound).map_err(|e| e.to_string())? {
            return Err(format!("S = {s} rejected for {phi}"));
        }
    }
    let counting = parse("exists x . exists y . not x = y").unwrap();
    if verify_limb_threshold(0, &counting, &bound).map_err(|e| e.to_string())? {
        return Err("S = 0 accepted for a counting formula".into());
    }
    Ok(format!(
        "S = {s} holds for {} formulas; S = 0 rejected for the counting formula",
        formulas.len()
    ))
}

/// AHU string of the subtree at `v` after keeping at most `s` copies of each
/// isomorphic limb.
fn pruned_form(children: &[Vec<usize>], v: usize, s: usize) -> String {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for &c in &children[v] {
        *counts.entry(pruned_form(children, c, s)).or_default() += 1;
    }
    let mut out = String::from("(");
    for (form, k) in counts {
        for _ in 0..k.min(s) {
            out.push_str(&form);
        }
    }
    out.push(')');
    out
}

/// Distinct pruned shapes over all rooted trees of depth <= `depth` with at
/// most `max_nodes` nodes.
fn brute_force_count(depth: usize, s: usize, max_nodes: usize) -> usize {
    fn grow(
        parent: &mut Vec<usize>,
        level: &mut Vec<usize>,
        depth: usize,
        s: usize,
        max_nodes: usize,
        seen: &mut BTreeSet<String>,
    ) {
        let mut children = vec![Vec::new(); parent.len()];
        for i in 1..parent.len() {
            children[parent[i]].push(i);
        }
        seen.insert(pruned_form(&children, 0, s));
        if parent.len() == max_nodes {
            return;
        }
        for p in 0..parent.len() {
            if level[p] + 1 > depth {
                continue;
            }
            parent.push(p);
            level.push(level[p] + 1);
            grow(parent, level, depth, s, max_nodes, seen);
            parent.pop();
            level.pop();
        }
    }
    let mut seen = BTreeSet::new();
    grow(&mut vec![0], &mut vec![1], depth, s, max_nodes, &mut seen);
    seen.len()
}

fn catalog_counts() -> Outcome {
    let alphabet = LabelAlphabet::new(2, vec![0]).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (s, expect) in [(1, 2), (2, 3)] {
        let got = enumerate_minimal_trees(2, s, &alphabet).map_err(|e| e.to_string())?.len();
        let brute = brute_force_count(2, s, 6);
        if got != expect || brute != expect {
            return Err(format!("S = {s}: catalog {got}, brute force {brute}, expected {expect}"));
        }
        parts.push(format!("S = {s}: {got}"));
    }
    Ok(format!("{} (brute force agrees)", parts.join(", ")))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let fuzz = fuzz_runs();
    let results: [(&str, Outcome); 8] = [
        ("decomposition validity", validity(&fuzz)),
        ("oracle query equivalence", query_equivalence(&fuzz)),
        ("path formula", path_formula()),
        ("tau/td agreement", tau_agreement()),
        ("work bounds", work_bounds(&fuzz)),
        ("size independence", size_independence()),
        ("limb threshold validation", threshold_validation()),
        ("catalog counts", catalog_counts()),
    ];
    let mut failed = 0;
    for (i, (name, res)) in results.iter().enumerate() {
        match res {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1?}",
        results.len() - failed,
        started.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
