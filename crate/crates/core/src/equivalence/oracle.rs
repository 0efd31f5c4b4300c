//! Exhaustive reference implementations, written directly from the
//! definitions and meant for small carriers only.

use super::{atom_violation, shared_support, EquivalenceError, Kind};
use crate::model::{is_coherent_pair, NeighbourhoodModel, Relation, StateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceLimits {
    /// Largest `|S1| * |S2|` for enumerating relations.
    pub max_pairs: usize,
    /// Largest `|S1| + |S2|` for enumerating partitions of the sum.
    pub max_sum: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits {
            max_pairs: 12,
            max_sum: 8,
        }
    }
}

fn atoms_agree(rel: &Relation, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> bool {
    let atoms = shared_support(left, right);
    rel.iter()
        .all(|(a, b)| atom_violation(&atoms, left, a, right, b).is_none())
}

/// Every `R`-coherent pair of subsets is agreed at every related pair.
fn coherent_pairs_agree(rel: &Relation, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> bool {
    let pairs: Vec<(usize, usize)> = rel.iter().collect();
    StateSet::all_subsets(left.len()).all(|u1| {
        StateSet::all_subsets(right.len()).all(|u2| {
            !is_coherent_pair(rel, u1, u2)
                || pairs
                    .iter()
                    .all(|&(a, b)| left.has_neighbourhood(a, u1) == right.has_neighbourhood(b, u2))
        })
    })
}

/// Sets with equal traces on `trace` are equally neighbourhoods of `state`.
fn traces_decide(model: &NeighbourhoodModel, state: usize, trace: StateSet) -> bool {
    StateSet::all_subsets(model.len()).all(|u| {
        StateSet::all_subsets(model.len())
            .filter(|v| v.intersection(trace) == u.intersection(trace))
            .all(|v| model.has_neighbourhood(state, u) == model.has_neighbourhood(state, v))
    })
}

pub fn naive_is_bisimulation(rel: &Relation, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> bool {
    let (dom, rng) = (rel.domain(), rel.range());
    atoms_agree(rel, left, right)
        && rel
            .iter()
            .all(|(a, b)| traces_decide(left, a, dom) && traces_decide(right, b, rng))
        && coherent_pairs_agree(rel, left, right)
}

pub fn naive_is_precocongruence(
    rel: &Relation,
    left: &NeighbourhoodModel,
    right: &NeighbourhoodModel,
) -> bool {
    atoms_agree(rel, left, right) && coherent_pairs_agree(rel, left, right)
}

/// Congruence of an equivalence on `M1 + M2` given as a block number per
/// state of the sum: related states agree on atoms and on every union of
/// blocks, read through the disjoint-union neighbourhoods.
pub fn naive_is_congruence_on_sum(
    block_of: &[usize],
    left: &NeighbourhoodModel,
    right: &NeighbourhoodModel,
) -> bool {
    let n1 = left.len();
    let k = block_of.iter().max().map_or(0, |m| m + 1);
    let atoms = shared_support(left, right);
    let side = |x: usize| if x < n1 { (left, x) } else { (right, x - n1) };
    let member = |x: usize, chosen: u64| {
        let (model, s) = side(x);
        let offset = if x < n1 { 0 } else { n1 };
        let trace: StateSet = (0..model.len())
            .filter(|&i| chosen & (1 << block_of[offset + i]) != 0)
            .collect();
        model.has_neighbourhood(s, trace)
    };
    let total = block_of.len();
    (0..total).all(|x| {
        (x + 1..total).filter(|&y| block_of[x] == block_of[y]).all(|y| {
            let ((mx, sx), (my, sy)) = (side(x), side(y));
            atom_violation(&atoms, mx, sx, my, sy).is_none()
                && (0..1u64 << k).all(|chosen| member(x, chosen) == member(y, chosen))
        })
    })
}

/// All set partitions of `{0, .., n-1}` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            prefix.push(b);
            extend(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(n), n, &mut out);
    out
}

pub fn brute_force(
    left: &NeighbourhoodModel,
    right: &NeighbourhoodModel,
    kind: Kind,
) -> Result<Relation, EquivalenceError> {
    brute_force_with(left, right, kind, BruteForceLimits::default())
}

/// Union of all relations of the given kind. For [`Kind::Behavioural`] the
/// union of all congruences on `M1 + M2`, restricted to pairs across the
/// two components.
pub fn brute_force_with(
    left: &NeighbourhoodModel,
    right: &NeighbourhoodModel,
    kind: Kind,
    limits: BruteForceLimits,
) -> Result<Relation, EquivalenceError> {
    let (n1, n2) = (left.len(), right.len());
    let mut union = Relation::empty(n1, n2);
    match kind {
        Kind::Bisimulation | Kind::Precocongruence => {
            let size = n1 * n2;
            if size > limits.max_pairs {
                return Err(EquivalenceError::CapExceeded {
                    size,
                    cap: limits.max_pairs,
                });
            }
            for bits in 0u64..1 << size {
                let rel = Relation::new(
                    n1,
                    n2,
                    (0..size)
                        .filter(|k| bits & (1 << k) != 0)
                        .map(|k| (k / n2, k % n2)),
                )
                .expect("pairs in range");
                let accepted = if kind == Kind::Bisimulation {
                    naive_is_bisimulation(&rel, left, right)
                } else {
                    naive_is_precocongruence(&rel, left, right)
                };
                if accepted {
                    union = union.union(&rel);
                }
            }
        }
        Kind::Behavioural => {
            let size = n1 + n2;
            if size > limits.max_sum {
                return Err(EquivalenceError::CapExceeded {
                    size,
                    cap: limits.max_sum,
                });
            }
            for block_of in set_partitions(size) {
                if naive_is_congruence_on_sum(&block_of, left, right) {
                    for a in 0..n1 {
                        for b in 0..n2 {
                            if block_of[a] == block_of[n1 + b] {
                                union.insert(a, b);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(union)
}
