use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdd_core::dynamic::{DynConfig, DynError, DynamicDecomposition};
use tdd_core::graph::{DynamicGraph, VertexId};
use tdd_core::mso::{build_gamma, evaluate, parse, ConstantAssignment, EvalOptions, Formula};
use tdd_core::static_core::{is_valid_decomposition, tree_depth};

const S: usize = 2;

fn dominating() -> Formula {
    parse("exists x . forall y . (x = y or edge(x,y))").unwrap()
}

fn build(
    n: usize,
    edges: &[(usize, usize)],
    depth: usize,
    phi: Formula,
) -> (DynamicDecomposition, Vec<VertexId>) {
    let (g, ids) = DynamicGraph::from_edges(n, edges);
    let d = DynamicDecomposition::initialize(&g, DynConfig::new(depth, S), phi).unwrap();
    (d, ids)
}

fn audit(d: &DynamicDecomposition) {
    d.check_invariants().unwrap();
    let f = d.decompress();
    assert!(is_valid_decomposition(d.graph(), &f, d.config().depth).unwrap());
    if d.graph().vertex_count() <= EvalOptions::default().max_vertices {
        let want = evaluate(
            d.graph(),
            d.formula(),
            ConstantAssignment::none(),
            EvalOptions::default(),
        )
        .unwrap();
        assert_eq!(d.query(), want);
    }
}

#[test]
fn empty_graph() {
    let (d, _) = build(0, &[], 2, parse("exists x . x = x").unwrap());
    audit(&d);
    assert!(!d.query());
    assert_eq!(d.cabinet_count(), 0);
}

#[test]
fn star_has_two_cabinets() {
    let edges: Vec<_> = (1..30).map(|i| (0, i)).collect();
    let (d, ids) = build(30, &edges, 2, build_gamma());
    audit(&d);
    assert_eq!(d.cabinet_count(), 2);
    let kids = d.child_drawers(ids[0]).unwrap();
    assert_eq!(kids.len(), 1);
    assert_eq!(kids[0].members.len(), 29);
}

#[test]
fn path_on_seven_fits_depth_three() {
    let edges: Vec<_> = (0..6).map(|i| (i, i + 1)).collect();
    let (d, _) = build(7, &edges, 3, build_gamma());
    audit(&d);
    assert_eq!(d.decompress().depth(), 3);
}

#[test]
fn extracting_a_star_leaf_splits_its_drawer() {
    let edges: Vec<_> = (1..6).map(|i| (0, i)).collect();
    let (mut d, ids) = build(6, &edges, 2, build_gamma());
    let before = d.decompress();
    let leaf = d.child_drawers(ids[0]).unwrap()[0].members[2];
    let ext = d.extract_path(leaf).unwrap();
    assert_eq!(ext.path, vec![ids[0], leaf]);
    assert_eq!(ext.split, vec![leaf]);
    assert!(d.is_dirty());
    let mut sizes: Vec<usize> = d
        .child_drawers(ids[0])
        .unwrap()
        .iter()
        .map(|v| v.members.len())
        .collect();
    sizes.sort();
    assert_eq!(sizes, vec![1, 4]);
    assert_eq!(d.decompress(), before);
    d.clean_dirty(ext);
    assert!(!d.is_dirty());
    audit(&d);
    assert_eq!(d.child_drawers(ids[0]).unwrap().len(), 1);
}

#[test]
fn extracting_a_root_or_singleton_path_splits_nothing() {
    let (mut d, ids) = build(3, &[(0, 1), (1, 2)], 3, build_gamma());
    let root = d.roots()[0];
    let ext = d.extract_path(root).unwrap();
    assert_eq!(ext.path, vec![root]);
    assert!(ext.split.is_empty());
    d.clean_dirty(ext);
    d.reroot(ids[0]).unwrap();
    let before = d.digest();
    let ext = d.extract_path(ids[2]).unwrap();
    assert_eq!(ext.path, ids);
    assert!(ext.split.is_empty());
    d.clean_dirty(ext);
    assert_eq!(d.digest(), before);
    audit(&d);
}

#[test]
fn extract_then_clean_restores_the_profile() {
    let edges = [(0, 1), (0, 2), (0, 3), (3, 4), (3, 5), (0, 6)];
    let (mut d, ids) = build(7, &edges, 3, build_gamma());
    let profile = d.drawer_profile();
    for &v in &ids {
        let ext = d.extract_path(v).unwrap();
        d.clean_dirty(ext);
        audit(&d);
        assert_eq!(d.drawer_profile(), profile);
    }
}

#[test]
fn deleting_from_a_triangle() {
    let (mut d, ids) = build(3, &[(0, 1), (1, 2), (0, 2)], 3, build_gamma());
    d.delete_edge(ids[0], ids[2]).unwrap();
    audit(&d);
    assert_eq!(d.roots().len(), 1);
    assert!(d.query());
}

#[test]
fn deleting_the_edge_of_k2_splits() {
    let (mut d, ids) = build(2, &[(0, 1)], 2, build_gamma());
    assert!(d.query());
    d.delete_edge(ids[0], ids[1]).unwrap();
    audit(&d);
    assert_eq!(d.roots().len(), 2);
    assert!(!d.query());
    assert_eq!(
        d.delete_edge(ids[0], ids[1]),
        Err(DynError::NoSuchEdge(ids[0], ids[1]))
    );
}

#[test]
fn deleting_a_spoke_detaches_the_leaf() {
    let edges: Vec<_> = (1..8).map(|i| (0, i)).collect();
    let (mut d, ids) = build(8, &edges, 2, build_gamma());
    d.delete_edge(ids[0], ids[3]).unwrap();
    audit(&d);
    assert_eq!(d.roots().len(), 2);
    assert_eq!(d.parent(ids[3]).unwrap(), None);
    let kids = d.child_drawers(ids[0]).unwrap();
    assert_eq!(kids.len(), 1);
    assert_eq!(kids[0].members.len(), 6);
}

#[test]
fn merging_siblings_after_a_deletion() {
    // Root 0 with children 1 and 2; 2 also carries the leaf 3. Deleting
    // 2-3 leaves 2 like 1, and 3 becomes its own tree.
    let (mut d, ids) = build(4, &[(0, 1), (0, 2), (2, 3)], 3, build_gamma());
    d.reroot(ids[0]).unwrap();
    audit(&d);
    d.delete_edge(ids[2], ids[3]).unwrap();
    audit(&d);
    let kids = d.child_drawers(ids[0]).unwrap();
    assert_eq!(kids.len(), 1);
    assert_eq!(kids[0].members.len(), 2);
}

#[test]
fn reroot_examples() {
    let (mut d, ids) = build(3, &[(0, 1), (1, 2)], 3, build_gamma());
    let root = d.roots()[0];
    let before = d.digest();
    d.reroot(root).unwrap();
    assert_eq!(d.digest(), before);
    d.reroot(ids[0]).unwrap();
    audit(&d);
    assert_eq!(d.roots(), &[ids[0]]);

    let edges: Vec<_> = (1..6).map(|i| (0, i)).collect();
    let (mut d, ids) = build(6, &edges, 3, build_gamma());
    d.reroot(ids[4]).unwrap();
    audit(&d);
    assert_eq!(d.roots(), &[ids[4]]);
    assert_eq!(d.parent(ids[0]).unwrap(), Some(ids[4]));
    for &l in &[ids[1], ids[2], ids[3], ids[5]] {
        assert_eq!(d.parent(l).unwrap(), Some(ids[0]));
    }
    assert!(d.last_counters().reroot_depth <= 3);
}

#[test]
fn reroot_without_a_witness_is_reported() {
    let edges: Vec<_> = (0..6).map(|i| (i, i + 1)).collect();
    let (mut d, ids) = build(7, &edges, 3, build_gamma());
    let before = d.digest();
    assert!(matches!(
        d.reroot(ids[0]),
        Err(DynError::NoRootWitness { .. })
    ));
    assert_eq!(d.digest(), before);
}

#[test]
fn insert_examples() {
    let (mut d, ids) = build(3, &[(0, 1), (1, 2)], 3, build_gamma());
    d.reroot(ids[0]).unwrap();
    d.insert_edge(ids[0], ids[2]).unwrap();
    audit(&d);
    assert_eq!(d.last_counters().reroot_depth, 0);

    let (mut d, ids) = build(3, &[(0, 1), (1, 2)], 2, build_gamma());
    let before = d.digest();
    assert_eq!(
        d.insert_edge(ids[0], ids[2]),
        Err(DynError::DepthWouldExceed(ids[0], ids[2]))
    );
    assert_eq!(d.digest(), before);
    audit(&d);
    assert_eq!(
        d.insert_edge(ids[0], ids[1]),
        Err(DynError::EdgeExists(ids[0], ids[1]))
    );
    assert_eq!(
        d.insert_edge(ids[0], ids[0]),
        Err(DynError::SelfLoop(ids[0]))
    );

    let (mut d, ids) = build(2, &[], 2, build_gamma());
    assert!(!d.query());
    d.insert_edge(ids[0], ids[1]).unwrap();
    audit(&d);
    assert_eq!(d.roots().len(), 1);
    assert_eq!(d.decompress().depth(), 2);
}

#[test]
fn isolated_vertices() {
    let mut d = DynamicDecomposition::new(DynConfig::new(2, S), build_gamma()).unwrap();
    let v = d.add_isolated_vertex().unwrap();
    audit(&d);
    assert_eq!(d.cabinet_count(), 1);
    d.remove_isolated_vertex(v).unwrap();
    audit(&d);
    assert!(d.roots().is_empty());
    for _ in 0..1000 {
        d.add_isolated_vertex().unwrap();
        assert_eq!(d.last_counters().cabinets_touched, 1);
    }
    assert_eq!(d.roots().len(), 1000);
    audit(&d);
    let (mut d, ids) = build(2, &[(0, 1)], 2, build_gamma());
    assert_eq!(
        d.remove_isolated_vertex(ids[0]),
        Err(DynError::NotIsolated(ids[0]))
    );
    assert_eq!(
        d.remove_isolated_vertex(VertexId(99)),
        Err(DynError::NotPresent(VertexId(99)))
    );
}

#[test]
fn query_examples() {
    let (d, _) = build(3, &[(0, 1)], 2, parse("exists x . x = x").unwrap());
    assert!(d.query());
    let (d, _) = build(3, &[(0, 1)], 2, build_gamma());
    assert!(!d.query());
}

#[test]
fn find_root_examples() {
    let (mut d, ids) = build(1, &[], 1, build_gamma());
    assert_eq!(
        d.find_root(ids[0], ConstantAssignment::none(), 1),
        Ok(ids[0])
    );
    let (mut d, ids) = build(3, &[(0, 1), (1, 2)], 3, build_gamma());
    assert_eq!(
        d.find_root(ids[1], ConstantAssignment::pair(ids[0], ids[2]), 2),
        Err(DynError::Infeasible(2))
    );
    assert_eq!(
        d.find_root(ids[0], ConstantAssignment::none(), 2),
        Ok(ids[1])
    );
}

#[test]
fn removing_an_isolated_inner_vertex_keeps_the_rest() {
    // 0 is a root whose only neighbour goes away, leaving it isolated with
    // a child below it.
    let (mut d, ids) = build(3, &[(0, 1), (1, 2)], 3, build_gamma());
    d.reroot(ids[0]).unwrap();
    d.delete_edge(ids[0], ids[1]).unwrap();
    audit(&d);
    d.remove_isolated_vertex(ids[0]).unwrap();
    audit(&d);
    assert_eq!(d.graph().vertex_count(), 2);
}

/// Random walk over valid commands, insertions filtered by the exact
/// tree-depth oracle, auditing after every step.
fn random_walk(seed: u64, steps: usize, depth: usize, n_max: usize, phi: Formula) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = DynamicDecomposition::new(DynConfig::new(depth, S), phi).unwrap();
    let mut rejected = 0;
    for _ in 0..steps {
        let vs: Vec<VertexId> = d.graph().vertices().collect();
        let roll = rng.gen_range(0..10);
        if vs.len() < 2 || (roll == 0 && vs.len() < n_max) {
            d.add_isolated_vertex().unwrap();
        } else if roll == 1 {
            let v = vs[rng.gen_range(0..vs.len())];
            if d.graph().degree(v) == 0 {
                d.remove_isolated_vertex(v).unwrap();
            }
        } else {
            let u = vs[rng.gen_range(0..vs.len())];
            let v = vs[rng.gen_range(0..vs.len())];
            if u == v {
                continue;
            }
            if d.graph().has_edge(u, v) {
                if roll < 5 {
                    d.delete_edge(u, v).unwrap();
                    assert!(d.last_counters().cabinets_touched <= 7 * depth);
                }
            } else {
                let mut g = d.graph().clone();
                g.set_edge(u, v, true).unwrap();
                let before = d.digest();
                let res = d.insert_edge(u, v);
                if tree_depth(&g) <= depth {
                    res.unwrap();
                    assert!(d.last_counters().reroot_depth <= depth);
                } else {
                    assert_eq!(res, Err(DynError::DepthWouldExceed(u, v)));
                    assert_eq!(d.digest(), before);
                    rejected += 1;
                }
            }
        }
        audit(&d);
    }
    rejected
}

#[test]
fn random_walks_stay_valid() {
    for seed in 0..6 {
        random_walk(seed, 400, 3, 10, build_gamma());
        random_walk(seed + 100, 400, 3, 10, dominating());
        random_walk(seed + 200, 300, 2, 8, build_gamma());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn initialize_matches_oracle(edges in prop::collection::vec((0usize..9, 0usize..9), 0..14)) {
        let edges: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let (g, _) = DynamicGraph::from_edges(9, &edges);
        let td = tree_depth(&g);
        let res = DynamicDecomposition::initialize(&g, DynConfig::new(3, S), build_gamma());
        if td <= 3 {
            let d = res.unwrap();
            audit(&d);
            let again =
                DynamicDecomposition::from_forest(d.graph(), &d.decompress(), DynConfig::new(3, S), build_gamma())
                    .unwrap();
            audit(&again);
            prop_assert_eq!(again.drawer_profile(), d.drawer_profile());
        } else {
            prop_assert_eq!(res.err(), Some(DynError::DepthExceeded(3)));
        }
    }

    #[test]
    fn walks_agree_with_oracle(seed in any::<u64>()) {
        random_walk(seed, 120, 3, 9, build_gamma());
    }
}
