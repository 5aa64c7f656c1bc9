//! Exhaustive enumeration of small graphs up to isomorphism.

use crate::graph::DynamicGraph;

/// Largest order accepted by the enumerators.
pub const MAX_ENUMERATED_ORDER: usize = 7;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out
}

/// One representative per isomorphism class of graphs on exactly `n`
/// vertices, each given as an edge list over `0..n`. The representative is
/// the class member with the smallest edge mask.
pub fn graphs_up_to_iso(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(
        n <= MAX_ENUMERATED_ORDER,
        "enumeration limited to {MAX_ENUMERATED_ORDER} vertices"
    );
    let mut pairs = Vec::new();
    let mut index = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            index[i][j] = pairs.len();
            index[j][i] = pairs.len();
            pairs.push((i, j));
        }
    }
    let maps: Vec<Vec<usize>> = permutations(n)
        .into_iter()
        .map(|p| pairs.iter().map(|&(i, j)| index[p[i]][p[j]]).collect())
        .collect();
    let mut out = Vec::new();
    'mask: for mask in 0u32..(1 << pairs.len()) {
        for map in &maps {
            let mut image = 0u32;
            for (e, &t) in map.iter().enumerate() {
                image |= (mask >> e & 1) << t;
            }
            if image < mask {
                continue 'mask;
            }
        }
        out.push(
            (0..pairs.len())
                .filter(|e| mask >> e & 1 == 1)
                .map(|e| pairs[e])
                .collect(),
        );
    }
    out
}

/// Connected representatives among [`graphs_up_to_iso`].
pub fn connected_graphs_up_to_iso(n: usize) -> Vec<Vec<(usize, usize)>> {
    graphs_up_to_iso(n)
        .into_iter()
        .filter(|edges| DynamicGraph::from_edges(n, edges).0.components().len() == 1)
        .collect()
}
