use serde::{Deserialize, Serialize};

use super::{check_depth, decode, BitTree, LabelAlphabet, MinimalError};
use crate::mso::{
    build_tau, build_tau_prime, evaluate, evaluate_rooted, ConstantAssignment, EvalOptions, Formula,
};
use crate::static_core::CanonicalKey;

pub const DEFAULT_CATALOG_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CatalogConfig {
    /// Hard cap on the number of trees at any depth level.
    pub max_trees: usize,
    /// Trees with more vertices are skipped, not counted.
    pub max_vertices: Option<usize>,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        Self {
            max_trees: DEFAULT_CATALOG_CAP,
            max_vertices: None,
        }
    }
}

/// Trees of depth at most `depth` with at most `s` pairwise isomorphic limbs
/// below any vertex, up to isomorphism. Entry ids are dense and follow
/// canonical-key order; each entry's nodes are stored in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalTreeCatalog {
    pub depth: usize,
    pub s: usize,
    pub alphabet: LabelAlphabet,
    entries: Vec<BitTree>,
    keys: Vec<CanonicalKey>,
}

impl MinimalTreeCatalog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tree(&self, id: usize) -> &BitTree {
        &self.entries[id]
    }

    pub fn key(&self, id: usize) -> &CanonicalKey {
        &self.keys[id]
    }

    pub fn trees(&self) -> impl Iterator<Item = &BitTree> {
        self.entries.iter()
    }

    pub fn id_of(&self, key: &CanonicalKey) -> Option<usize> {
        self.keys.binary_search(key).ok()
    }

    pub(crate) fn from_parts(
        depth: usize,
        s: usize,
        alphabet: LabelAlphabet,
        entries: Vec<BitTree>,
    ) -> Result<Self, MinimalError> {
        let mut keyed: Vec<(CanonicalKey, BitTree)> = entries
            .into_iter()
            .map(|t| (t.subtree_keys().swap_remove(0), canonical_copy(&t)))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        if keyed.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(MinimalError::Cache("duplicate catalog entries".into()));
        }
        let (keys, entries) = keyed.into_iter().unzip();
        Ok(Self {
            depth,
            s,
            alphabet,
            entries,
            keys,
        })
    }
}

/// Copy of `t` with nodes renumbered in canonical order.
pub(crate) fn canonical_copy(t: &BitTree) -> BitTree {
    let order = t.canonical_order();
    let mut pos = vec![0; t.len()];
    for (i, &n) in order.iter().enumerate() {
        pos[n] = i;
    }
    let mut out = BitTree::leaf(*t.label(order[0]));
    for &n in &order[1..] {
        out.add_child(pos[t.parent(n).unwrap()], *t.label(n));
    }
    out
}

/// Limb types by absolute root depth: `levels[j - 1]` holds the trees that
/// can hang with their root at depth `j`.
pub(crate) fn limb_types(
    depth: usize,
    s: usize,
    alphabet: &LabelAlphabet,
    cfg: CatalogConfig,
) -> Result<Vec<Vec<BitTree>>, MinimalError> {
    check_depth(depth)?;
    let cap_size = cfg.max_vertices.unwrap_or(usize::MAX);
    let mut levels: Vec<Vec<BitTree>> = vec![Vec::new(); depth];
    for j in (1..=depth).rev() {
        let children: &[BitTree] = if j == depth { &[] } else { &levels[j] };
        let mut out = Vec::new();
        for label in alphabet.at_depth(j) {
            let mut counts = vec![0usize; children.len()];
            grow(children, s, cap_size, 1, 0, &mut counts, &mut |counts| {
                if out.len() >= cfg.max_trees {
                    return Err(MinimalError::CatalogBudgetExceeded { cap: cfg.max_trees });
                }
                let mut t = BitTree::leaf(label);
                for (c, &m) in children.iter().zip(counts.iter()) {
                    for _ in 0..m {
                        t.graft(0, c);
                    }
                }
                out.push(t);
                Ok(())
            })?;
        }
        levels[j - 1] = out;
    }
    Ok(levels)
}

/// Visits every multiplicity vector with entries in `0..=s` whose total size
/// stays within `cap`.
fn grow(
    children: &[BitTree],
    s: usize,
    cap: usize,
    size: usize,
    i: usize,
    counts: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]) -> Result<(), MinimalError>,
) -> Result<(), MinimalError> {
    if size > cap {
        return Ok(());
    }
    if i == children.len() {
        return emit(counts);
    }
    for m in 0..=s {
        let next = size + m * children[i].len();
        if next > cap {
            break;
        }
        counts[i] = m;
        grow(children, s, cap, next, i + 1, counts, emit)?;
    }
    counts[i] = 0;
    Ok(())
}

pub(crate) fn enumerate_with(
    depth: usize,
    s: usize,
    alphabet: &LabelAlphabet,
    cfg: CatalogConfig,
) -> Result<MinimalTreeCatalog, MinimalError> {
    let mut levels = limb_types(depth, s, alphabet, cfg)?;
    MinimalTreeCatalog::from_parts(depth, s, alphabet.clone(), levels.swap_remove(0))
}

/// All trees of depth at most `depth` whose labels fit their depth and whose
/// vertices have at most `s` pairwise isomorphic limbs.
pub fn enumerate_minimal_trees(
    depth: usize,
    s: usize,
    alphabet: &LabelAlphabet,
) -> Result<MinimalTreeCatalog, MinimalError> {
    enumerate_with(depth, s, alphabet, CatalogConfig::default())
}

/// [`enumerate_minimal_trees`] under an explicit budget.
pub fn enumerate_minimal_trees_with(
    depth: usize,
    s: usize,
    alphabet: &LabelAlphabet,
    cfg: CatalogConfig,
) -> Result<MinimalTreeCatalog, MinimalError> {
    enumerate_with(depth, s, alphabet, cfg)
}

/// Where the constants sit, as node indices of the catalog tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Placement {
    Unplaced,
    Pair(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootEntry {
    pub tree: usize,
    pub t: usize,
    pub placement: Placement,
    /// Nodes that can root a decomposition of depth `t`; `None` when there is
    /// none (infeasible).
    pub roots: Option<Vec<usize>>,
}

impl RootEntry {
    pub fn is_infeasible(&self) -> bool {
        self.roots.is_none()
    }
}

/// For every tree, every `t` in `1..=depth` and every placement of `a`, `b`
/// (unordered pairs of distinct nodes, or unplaced), the roots accepted by
/// `τ′_t` (`τ_t` when unplaced) with the outer quantifier fixed.
pub fn build_root_table(
    catalog: &MinimalTreeCatalog,
    depth: usize,
) -> Result<Vec<RootEntry>, MinimalError> {
    let opts = EvalOptions::default();
    let mut taus = Vec::new();
    for t in 1..=depth {
        taus.push((build_tau(t)?, build_tau_prime(t)?));
    }
    let mut out = Vec::new();
    for (id, tree) in catalog.trees().enumerate() {
        let (g, ids) = decode(tree)?;
        let n = tree.len();
        let mut placements = vec![Placement::Unplaced];
        for a in 0..n {
            for b in a + 1..n {
                placements.push(Placement::Pair(a, b));
            }
        }
        for (ti, (tau, tau_prime)) in taus.iter().enumerate() {
            for &placement in &placements {
                let (f, consts) = match placement {
                    Placement::Unplaced => (tau, ConstantAssignment::none()),
                    Placement::Pair(a, b) => (tau_prime, ConstantAssignment::pair(ids[a], ids[b])),
                };
                let mut roots = Vec::new();
                for (v, &vid) in ids.iter().enumerate() {
                    if evaluate_rooted(&g, f, consts, opts, vid)? {
                        roots.push(v);
                    }
                }
                out.push(RootEntry {
                    tree: id,
                    t: ti + 1,
                    placement,
                    roots: (!roots.is_empty()).then_some(roots),
                });
            }
        }
    }
    Ok(out)
}

/// Truth of `phi_user` on each decoded catalog tree.
pub fn build_sat_table(
    catalog: &MinimalTreeCatalog,
    phi_user: &Formula,
) -> Result<Vec<bool>, MinimalError> {
    if phi_user.uses_constants() != (false, false) {
        return Err(MinimalError::UnexpectedConstants);
    }
    catalog
        .trees()
        .map(|t| {
            let (g, _) = decode(t)?;
            Ok(evaluate(
                &g,
                phi_user,
                ConstantAssignment::none(),
                EvalOptions::default(),
            )?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mso::{build_gamma, parse};

    fn one_label(depth: usize) -> LabelAlphabet {
        LabelAlphabet::new(depth, vec![0]).unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(
            enumerate_minimal_trees(1, 1, &one_label(1)).unwrap().len(),
            1
        );
        assert_eq!(
            enumerate_minimal_trees(2, 1, &one_label(2)).unwrap().len(),
            2
        );
        assert_eq!(
            enumerate_minimal_trees(2, 2, &one_label(2)).unwrap().len(),
            3
        );
        // Root label 0; two leaf labels; multiplicities 0..=2 each.
        let full = LabelAlphabet::full(2).unwrap();
        assert_eq!(enumerate_minimal_trees(2, 2, &full).unwrap().len(), 9);
    }

    #[test]
    fn budget_is_enforced() {
        let a = LabelAlphabet::full(3).unwrap();
        let cfg = CatalogConfig {
            max_trees: 1000,
            max_vertices: None,
        };
        assert_eq!(
            enumerate_with(3, 2, &a, cfg),
            Err(MinimalError::CatalogBudgetExceeded { cap: 1000 })
        );
    }

    #[test]
    fn ids_follow_key_order() {
        let c = enumerate_minimal_trees(3, 1, &LabelAlphabet::full(2).unwrap()).unwrap();
        for i in 1..c.len() {
            assert!(c.key(i - 1) < c.key(i));
        }
        for i in 0..c.len() {
            assert_eq!(c.id_of(c.key(i)), Some(i));
        }
    }

    fn find(c: &MinimalTreeCatalog, t: &BitTree) -> usize {
        c.id_of(&t.subtree_keys()[0]).unwrap()
    }

    #[test]
    fn root_table_examples() {
        let c = enumerate_minimal_trees(2, 2, &LabelAlphabet::full(2).unwrap()).unwrap();
        let table = build_root_table(&c, 2).unwrap();
        let entry = |tree: usize, t: usize, p: Placement| {
            table
                .iter()
                .find(|e| e.tree == tree && e.t == t && e.placement == p)
                .unwrap()
                .clone()
        };
        // P_3 as a star: centre plus two adjacent leaves.
        let mut p3 = BitTree::leaf(0);
        p3.add_child(0, 1);
        p3.add_child(0, 1);
        let id = find(&c, &p3);
        assert_eq!(entry(id, 2, Placement::Unplaced).roots, Some(vec![0]));
        assert!(entry(id, 1, Placement::Unplaced).is_infeasible());
        let single = find(&c, &BitTree::leaf(0));
        assert_eq!(entry(single, 1, Placement::Unplaced).roots, Some(vec![0]));
        // Two non-adjacent vertices joined by the constants form K_2.
        let mut two = BitTree::leaf(0);
        two.add_child(0, 0);
        let id = find(&c, &two);
        assert!(entry(id, 1, Placement::Pair(0, 1)).is_infeasible());
        assert_eq!(entry(id, 2, Placement::Pair(0, 1)).roots, Some(vec![0, 1]));
    }

    #[test]
    fn sat_table_examples() {
        let c = enumerate_minimal_trees(2, 2, &LabelAlphabet::full(2).unwrap()).unwrap();
        let nonempty = build_sat_table(&c, &parse("exists x . x = x").unwrap()).unwrap();
        assert!(nonempty.iter().all(|&b| b));
        let gamma = build_sat_table(&c, &build_gamma()).unwrap();
        let edge =
            build_sat_table(&c, &parse("exists x . exists y . edge(x, y)").unwrap()).unwrap();
        for (i, t) in c.trees().enumerate() {
            let zero = (0..t.len()).all(|n| *t.label(n) == 0);
            if zero && t.len() >= 2 {
                assert!(!gamma[i]);
            }
            assert_eq!(edge[i], !zero);
        }
        assert_eq!(
            build_sat_table(&c, &parse("a = a").unwrap()),
            Err(MinimalError::UnexpectedConstants)
        );
    }
}
