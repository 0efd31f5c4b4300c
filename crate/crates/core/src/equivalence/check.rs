use std::collections::{BTreeMap, BTreeSet};

use super::{atom_violation, shared_support, Certificate, EquivalenceError, Kind, Side, Verdict, Violation};
use crate::constructions::{self, Partition};
use crate::model::{
    bounded_morphism_violation, functor_image, NeighbourhoodModel, Relation, StateFunction, StateSet,
};

/// Subsets of `set` from the largest down to the empty set.
pub(crate) fn subsets_descending(set: StateSet) -> impl Iterator<Item = StateSet> {
    let mask = set.bits();
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let current = next?;
        next = (current != 0).then(|| (current - 1) & mask);
        Some(StateSet::from_bits(current))
    })
}

/// `2^len`, saturating to "more than any collection can hold".
fn cylinder_size(len: usize) -> u128 {
    1u128.checked_shl(len as u32).unwrap_or(u128::MAX)
}

/// Everything about a relation the per-pair conditions need.
pub(crate) struct Context<'a> {
    pub left: &'a NeighbourhoodModel,
    pub right: &'a NeighbourhoodModel,
    atoms: BTreeSet<u32>,
    dom: StateSet,
    rng: StateSet,
    free_left: StateSet,
    free_right: StateSet,
    // (left part, right part) of the class of each state in the equivalence
    // closure of R on the sum carrier
    left_class: Vec<(StateSet, StateSet)>,
    right_class: Vec<(StateSet, StateSet)>,
}

impl<'a> Context<'a> {
    pub fn new(rel: &Relation, left: &'a NeighbourhoodModel, right: &'a NeighbourhoodModel) -> Self {
        assert!(
            rel.dom_size() == left.len() && rel.cod_size() == right.len(),
            "relation does not match the carriers"
        );
        let (n1, n2) = (left.len(), right.len());
        let mut parent: Vec<usize> = (0..n1 + n2).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (a, b) in rel.iter() {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, n1 + b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut parts: BTreeMap<usize, (StateSet, StateSet)> = BTreeMap::new();
        let roots: Vec<usize> = (0..n1 + n2).map(|x| find(&mut parent, x)).collect();
        for (x, &root) in roots.iter().enumerate() {
            let entry = parts.entry(root).or_default();
            if x < n1 {
                entry.0.insert(x);
            } else {
                entry.1.insert(x - n1);
            }
        }
        let dom = rel.domain();
        let rng = rel.range();
        Context {
            left,
            right,
            atoms: shared_support(left, right),
            dom,
            rng,
            free_left: left.carrier().difference(dom),
            free_right: right.carrier().difference(rng),
            left_class: (0..n1).map(|x| parts[&roots[x]]).collect(),
            right_class: (0..n2).map(|y| parts[&roots[n1 + y]]).collect(),
        }
    }

    /// For a left set that is a union of classes, the right part of those
    /// classes; `None` if the set cuts a class.
    fn left_to_right(&self, u1: StateSet) -> Option<StateSet> {
        let mut acc = StateSet::EMPTY;
        for x in u1.iter() {
            let (l, r) = self.left_class[x];
            if !l.is_subset(u1) {
                return None;
            }
            acc = acc.union(r);
        }
        Some(acc)
    }

    fn right_to_left(&self, u2: StateSet) -> Option<StateSet> {
        let mut acc = StateSet::EMPTY;
        for y in u2.iter() {
            let (l, r) = self.right_class[y];
            if !r.is_subset(u2) {
                return None;
            }
            acc = acc.union(l);
        }
        Some(acc)
    }

    /// Condition 1a (left) or 1b (right) at one state.
    fn domain_split(&self, side: Side, state: usize) -> Option<Violation> {
        let (model, trace, free) = match side {
            Side::Left => (self.left, self.dom, self.free_left),
            Side::Right => (self.right, self.rng, self.free_right),
        };
        let needed = cylinder_size(free.len());
        let mut groups: BTreeMap<StateSet, (u128, StateSet)> = BTreeMap::new();
        for &u in model.neighbourhoods(state) {
            groups.entry(u.intersection(trace)).or_insert((0, u)).0 += 1;
        }
        let (&key, &(_, member)) = groups.iter().find(|(_, (count, _))| *count < needed)?;
        let non_member = subsets_descending(free)
            .map(|z| key.union(z))
            .find(|x| !model.has_neighbourhood(state, *x))
            .expect("an incomplete group misses some set");
        Some(Violation::DomainSplit {
            side,
            member,
            non_member,
        })
    }

    /// Condition 2: agreement on every coherent pair.
    fn coherent_split(&self, s1: usize, s2: usize) -> Option<Violation> {
        let counts = |model: &NeighbourhoodModel, s: usize, trace: StateSet| {
            let mut counts: BTreeMap<StateSet, u128> = BTreeMap::new();
            for &x in model.neighbourhoods(s) {
                *counts.entry(x.intersection(trace)).or_default() += 1;
            }
            counts
        };
        let right_counts = counts(self.right, s2, self.rng);
        let needed = cylinder_size(self.free_right.len());
        for &u1 in self.left.neighbourhoods(s1) {
            let Some(base) = self.left_to_right(u1) else {
                continue;
            };
            if right_counts.get(&base).copied().unwrap_or(0) < needed {
                let u2 = subsets_descending(self.free_right)
                    .map(|z| base.union(z))
                    .find(|x| !self.right.has_neighbourhood(s2, *x))
                    .expect("incomplete cylinder");
                return Some(Violation::CoherentPair { left: u1, right: u2 });
            }
        }
        let left_counts = counts(self.left, s1, self.dom);
        let needed = cylinder_size(self.free_left.len());
        for &u2 in self.right.neighbourhoods(s2) {
            let Some(base) = self.right_to_left(u2) else {
                continue;
            };
            if left_counts.get(&base).copied().unwrap_or(0) < needed {
                let u1 = subsets_descending(self.free_left)
                    .map(|z| base.union(z))
                    .find(|x| !self.left.has_neighbourhood(s1, *x))
                    .expect("incomplete cylinder");
                return Some(Violation::CoherentPair { left: u1, right: u2 });
            }
        }
        None
    }

    pub fn pair_violation(&self, kind: Kind, s1: usize, s2: usize) -> Option<Violation> {
        if let Some(v) = atom_violation(&self.atoms, self.left, s1, self.right, s2) {
            return Some(v);
        }
        if kind == Kind::Bisimulation {
            if let Some(v) = self.domain_split(Side::Left, s1) {
                return Some(v);
            }
            if let Some(v) = self.domain_split(Side::Right, s2) {
                return Some(v);
            }
        }
        self.coherent_split(s1, s2)
    }

    pub fn certificate(&self, kind: Kind, s1: usize, s2: usize) -> Option<Certificate> {
        self.pair_violation(kind, s1, s2).map(|violation| Certificate {
            left: s1,
            right: s2,
            violation,
        })
    }
}

fn first_failure(kind: Kind, rel: &Relation, ctx: &Context<'_>) -> Verdict {
    rel.iter()
        .find_map(|(a, b)| ctx.certificate(kind, a, b))
        .map_or(Verdict::Holds, Verdict::Fails)
}

/// Back-and-forth test: trace conditions on `dom(R)` and `rng(R)`,
/// agreement on coherent pairs, and atom agreement.
///
/// Panics if the relation does not match the carriers.
pub fn is_bisimulation(rel: &Relation, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> Verdict {
    first_failure(Kind::Bisimulation, rel, &Context::new(rel, left, right))
}

/// Agreement on every coherent pair, and atom agreement.
///
/// Panics if the relation does not match the carriers.
pub fn is_precocongruence(rel: &Relation, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> Verdict {
    first_failure(Kind::Precocongruence, rel, &Context::new(rel, left, right))
}

/// Precocongruence test through the pushout: for each pair,
/// `2^2(p1)(nu1(s1)) = 2^2(p2)(nu2(s2))`, plus atom agreement.
pub fn is_precocongruence_via_pushout(
    rel: &Relation,
    left: &NeighbourhoodModel,
    right: &NeighbourhoodModel,
) -> bool {
    let po = constructions::pushout(rel, left.states(), right.states()).expect("carriers fit a pushout");
    let atoms = shared_support(left, right);
    rel.iter().all(|(a, b)| {
        atom_violation(&atoms, left, a, right, b).is_none()
            && functor_image(&po.left, left.neighbourhoods(a)).expect("in range")
                == functor_image(&po.right, right.neighbourhoods(b)).expect("in range")
    })
}

/// Related states agree on every coherent subset and on atoms.
pub fn is_congruence(rel: &Relation, model: &NeighbourhoodModel) -> Result<Verdict, EquivalenceError> {
    if rel.dom_size() != model.len() || rel.cod_size() != model.len() {
        return Err(EquivalenceError::ShapeMismatch);
    }
    if !rel.is_equivalence() {
        return Err(EquivalenceError::NotAnEquivalence);
    }
    Ok(is_precocongruence(rel, model, model))
}

/// The equivalence closure of `rel` is a congruence; witnesses are drawn
/// from pairs of `rel` itself.
pub fn is_precongruence(rel: &Relation, model: &NeighbourhoodModel) -> Verdict {
    let closure = constructions::eq_closure(rel);
    let ctx = Context::new(&closure, model, model);
    first_failure(Kind::Precocongruence, rel, &ctx)
}

/// Precongruence test through the quotient map `e` of the closure: each pair
/// has equal images under `2^2(e) . nu` and agrees on atoms.
pub fn is_precongruence_via_quotient(rel: &Relation, model: &NeighbourhoodModel) -> bool {
    let partition = Partition::from_equivalence(&constructions::eq_closure(rel)).expect("closure");
    let map: StateFunction = partition.quotient_map();
    let atoms = model.atom_support();
    rel.iter().all(|(a, b)| {
        atom_violation(&atoms, model, a, model, b).is_none()
            && functor_image(&map, model.neighbourhoods(a)).expect("in range")
                == functor_image(&map, model.neighbourhoods(b)).expect("in range")
    })
}

/// Checks `f1: M1 -> N` and `f2: M2 -> N` are bounded morphisms and returns
/// the cocongruence `pb(f1, f2)`.
pub fn cocongruence_check(
    left: &NeighbourhoodModel,
    right: &NeighbourhoodModel,
    target: &NeighbourhoodModel,
    f1: &StateFunction,
    f2: &StateFunction,
) -> Result<Relation, EquivalenceError> {
    let mut atoms = shared_support(left, right);
    atoms.extend(target.atom_support());
    if let Some(violation) = bounded_morphism_violation(f1, left, target, &atoms) {
        return Err(EquivalenceError::NotABoundedMorphism {
            side: "left",
            violation,
        });
    }
    if let Some(violation) = bounded_morphism_violation(f2, right, target, &atoms) {
        return Err(EquivalenceError::NotABoundedMorphism {
            side: "right",
            violation,
        });
    }
    constructions::pullback(f1, f2).map_err(|_| EquivalenceError::ShapeMismatch)
}
