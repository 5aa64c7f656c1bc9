use serde::{Deserialize, Serialize};

use super::catalog::{limb_types, CatalogConfig};
use super::{check_depth, decode, BitTree, LabelAlphabet, MinimalError};
use crate::graph::{DynamicGraph, VertexId};
use crate::mso::{evaluate, ConstantAssignment, EvalOptions, Formula};
use crate::static_core::CanonicalKey;

/// Trees examined by [`verify_limb_threshold`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBound {
    pub depth: usize,
    pub alphabet: LabelAlphabet,
    /// Neither side of a comparison may exceed this many vertices.
    pub max_vertices: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdConfig {
    /// Validation never looks deeper than this.
    pub validation_depth: usize,
    pub max_vertices: usize,
    /// Largest `S` tried before giving up.
    pub max_s: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            validation_depth: 2,
            max_vertices: 7,
            max_s: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimbThreshold {
    pub s: usize,
    /// `2^q + q` for quantifier rank `q`.
    pub seed: usize,
    pub validated: bool,
    pub bound: EnumerationBound,
}

fn seed_for(rank: usize) -> usize {
    if rank >= 32 {
        usize::MAX
    } else {
        (1usize << rank) + rank
    }
}

/// Disjoint union of decoded trees; vertex ids follow tree order then node
/// order.
fn decode_forest(trees: &[&BitTree]) -> Result<(DynamicGraph, Vec<VertexId>), MinimalError> {
    let n = trees.iter().map(|t| t.len()).sum();
    let (mut g, ids) = DynamicGraph::with_vertices(n);
    let mut offset = 0;
    for t in trees {
        let (h, hids) = decode(t)?;
        for (u, v) in h.edges() {
            let (iu, iv) = (
                hids.binary_search(&u).unwrap(),
                hids.binary_search(&v).unwrap(),
            );
            g.set_edge(ids[offset + iu], ids[offset + iv], true)
                .expect("distinct vertices");
        }
        offset += t.len();
    }
    Ok((g, ids))
}

struct Checker<'a> {
    phi: &'a Formula,
    uses: (bool, bool),
    opts: EvalOptions,
}

impl Checker<'_> {
    /// Whether `phi` agrees on `small` and `big` for every placement of the
    /// constants on vertices of `small`. The first `|small|` vertices of `big`
    /// correspond to those of `small`.
    fn agree(
        &self,
        small: &(DynamicGraph, Vec<VertexId>),
        big: &(DynamicGraph, Vec<VertexId>),
    ) -> Result<bool, MinimalError> {
        let n = small.1.len();
        let a_range: Vec<Option<usize>> = if self.uses.0 {
            (0..n).map(Some).collect()
        } else {
            vec![None]
        };
        let b_range: Vec<Option<usize>> = if self.uses.1 {
            (0..n).map(Some).collect()
        } else {
            vec![None]
        };
        if (self.uses.0 || self.uses.1) && n == 0 {
            return Ok(true);
        }
        for &a in &a_range {
            for &b in &b_range {
                let place = |ids: &[VertexId]| ConstantAssignment {
                    a: a.map(|i| ids[i]),
                    b: b.map(|i| ids[i]),
                };
                let x = evaluate(&small.0, self.phi, place(&small.1), self.opts)?;
                let y = evaluate(&big.0, self.phi, place(&big.1), self.opts)?;
                if x != y {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn depths(t: &BitTree) -> Vec<usize> {
    let mut d = vec![1; t.len()];
    for i in 1..t.len() {
        d[i] = d[t.parent(i).unwrap()] + 1;
    }
    d
}

/// Checks the limb threshold at desk scale: adding one more
/// copy of a limb that already occurs `s` times below some vertex (or one more
/// copy of a component that occurs `s` times) never changes the truth of
/// `phi`, for every placement of the constants it mentions.
pub fn verify_limb_threshold(
    s: usize,
    phi: &Formula,
    bound: &EnumerationBound,
) -> Result<bool, MinimalError> {
    check_depth(bound.depth)?;
    let cfg = CatalogConfig {
        max_vertices: Some(bound.max_vertices),
        ..CatalogConfig::default()
    };
    let levels = limb_types(bound.depth, s, &bound.alphabet, cfg)?;
    let level_keys: Vec<Vec<CanonicalKey>> = levels
        .iter()
        .map(|l| l.iter().map(|t| t.subtree_keys().swap_remove(0)).collect())
        .collect();
    let checker = Checker {
        phi,
        uses: phi.uses_constants(),
        opts: EvalOptions {
            max_vertices: bound.max_vertices.max(1),
        },
    };

    for tree in &levels[0] {
        let small = decode(tree)?;
        let keys = tree.subtree_keys();
        let depth = depths(tree);
        for w in 0..tree.len() {
            if depth[w] >= bound.depth {
                continue;
            }
            let below = &levels[depth[w]];
            for (li, limb) in below.iter().enumerate() {
                if tree.len() + limb.len() > bound.max_vertices {
                    continue;
                }
                let k = &level_keys[depth[w]][li];
                let count = tree.children(w).iter().filter(|&&c| &keys[c] == k).count();
                if count != s {
                    continue;
                }
                let mut grown = tree.clone();
                grown.graft(w, limb);
                if !checker.agree(&small, &decode(&grown)?)? {
                    return Ok(false);
                }
            }
        }
    }

    let roots = &levels[0];
    let mut forest: Vec<usize> = Vec::new();
    let ok = forests(
        roots,
        s,
        bound.max_vertices,
        0,
        0,
        &mut forest,
        &mut |f, size| {
            let trees: Vec<&BitTree> = f.iter().map(|&i| &roots[i]).collect();
            let small = decode_forest(&trees)?;
            for (li, limb) in roots.iter().enumerate() {
                if size + limb.len() > bound.max_vertices
                    || f.iter().filter(|&&i| i == li).count() != s
                {
                    continue;
                }
                let mut more = trees.clone();
                more.push(limb);
                if !checker.agree(&small, &decode_forest(&more)?)? {
                    return Ok(false);
                }
            }
            Ok(true)
        },
    )?;
    Ok(ok)
}

/// Visits multisets (as nondecreasing index lists) over `types` with
/// multiplicity at most `s` and total size at most `cap`. Stops at the first
/// visit returning `false`.
fn forests(
    types: &[BitTree],
    s: usize,
    cap: usize,
    from: usize,
    size: usize,
    cur: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize], usize) -> Result<bool, MinimalError>,
) -> Result<bool, MinimalError> {
    if !visit(cur, size)? {
        return Ok(false);
    }
    for i in from..types.len() {
        let mult = cur.iter().filter(|&&j| j == i).count();
        if mult >= s || size + types[i].len() > cap {
            continue;
        }
        cur.push(i);
        let ok = forests(types, s, cap, i, size + types[i].len(), cur, visit)?;
        cur.pop();
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest validated `S`. Candidates run upward from 1 to the seed
/// `2^q + q`, then double past it, up to `cfg.max_s`. Validation runs on
/// trees of depth `min(depth, cfg.validation_depth)`.
pub fn compute_limb_threshold(
    phi: &Formula,
    alphabet: &LabelAlphabet,
    depth: usize,
    cfg: ThresholdConfig,
) -> Result<LimbThreshold, MinimalError> {
    check_depth(depth)?;
    let seed = seed_for(phi.quantifier_rank());
    let bound = EnumerationBound {
        depth: depth.min(cfg.validation_depth).max(1),
        alphabet: alphabet.clone(),
        max_vertices: cfg.max_vertices,
    };
    let mut candidates: Vec<usize> = (1..=seed.min(cfg.max_s)).collect();
    let mut s = seed;
    while s < cfg.max_s {
        s = s.saturating_mul(2).min(cfg.max_s);
        candidates.push(s);
    }
    for s in candidates {
        if verify_limb_threshold(s, phi, &bound)? {
            return Ok(LimbThreshold {
                s,
                seed,
                validated: true,
                bound,
            });
        }
    }
    Err(MinimalError::ValidationBudgetExceeded { cap: cfg.max_s })
}
