//! Largest congruence on `M1 + M2` by signature refinement, with defining
//! formulas for every block.
//!
//! States of the sum are numbered `0..n1` (left) then `n1..n1+n2` (right).
//! A block is stored as its left part and its right part. For a left state
//! `s`, a set of blocks `A` has `U(A) in nu(s)` iff the left part of `U(A)`
//! is in `nu1(s)`, so the signature of `s` only depends on the blocks that
//! meet the left carrier and is a cylinder over the purely right blocks.
//! Signatures are compared through a canonical key built from that
//! observation instead of listing all `2^k` unions of blocks.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use super::{shared_support, Certificate, EquivalenceReport, Kind, Violation};
use crate::constructions::Partition;
use crate::model::{NeighbourhoodModel, Relation, StateSet};
use crate::syntax::Formula;

type Mask = u128;

fn bit(i: usize) -> Mask {
    1 << i
}

fn submasks_descending(mask: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let current = next?;
        next = (current != 0).then(|| (current - 1) & mask);
        Some(current)
    })
}

fn cylinder_size(len: u32) -> u128 {
    1u128.checked_shl(len).unwrap_or(u128::MAX)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    /// Family is a cylinder over both kinds of pure blocks; lists the
    /// admissible sets of mixed blocks.
    Cylinder(Vec<Mask>),
    Left(Vec<Mask>),
    Right(Vec<Mask>),
}

#[derive(Debug, Clone)]
struct Round {
    block_of: Vec<usize>,
    /// (left part, right part) of each block, ordered by least member.
    blocks: Vec<(StateSet, StateSet)>,
    /// Block of the previous round containing each block.
    parent: Vec<usize>,
    pure_left: Mask,
    pure_right: Mask,
    mixed: Mask,
    /// Per state: the saturated neighbourhoods as block masks (sorted) and
    /// their canonical key. Filled in when the next round is computed.
    families: Vec<Vec<Mask>>,
    keys: Vec<Key>,
}

impl Round {
    fn new(block_of: Vec<usize>, n1: usize, parent: Vec<usize>) -> Round {
        let count = block_of.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![(StateSet::EMPTY, StateSet::EMPTY); count];
        for (x, &b) in block_of.iter().enumerate() {
            if x < n1 {
                blocks[b].0.insert(x);
            } else {
                blocks[b].1.insert(x - n1);
            }
        }
        let (mut pure_left, mut pure_right, mut mixed) = (0, 0, 0);
        for (i, &(l, r)) in blocks.iter().enumerate() {
            match (l.is_empty(), r.is_empty()) {
                (false, true) => pure_left |= bit(i),
                (true, false) => pure_right |= bit(i),
                _ => mixed |= bit(i),
            }
        }
        Round {
            block_of,
            blocks,
            parent,
            pure_left,
            pure_right,
            mixed,
            families: Vec::new(),
            keys: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.blocks.len()
    }

    /// Blocks meeting `u` (a subset of one side), if `u` is a union of the
    /// traces of those blocks on that side.
    fn saturated_mask(&self, u: StateSet, offset: usize, left_side: bool) -> Option<Mask> {
        let mut mask = 0;
        for x in u.iter() {
            let b = self.block_of[offset + x];
            let (l, r) = self.blocks[b];
            let trace = if left_side { l } else { r };
            if !trace.is_subset(u) {
                return None;
            }
            mask |= bit(b);
        }
        Some(mask)
    }

    fn compute_signatures(&mut self, left: &NeighbourhoodModel, right: &NeighbourhoodModel) {
        let n1 = left.len();
        let mut families = Vec::with_capacity(self.block_of.len());
        let mut keys = Vec::with_capacity(self.block_of.len());
        for x in 0..self.block_of.len() {
            let (model, state, offset, is_left) = if x < n1 {
                (left, x, 0, true)
            } else {
                (right, x - n1, n1, false)
            };
            let mut family: Vec<Mask> = model
                .neighbourhoods(state)
                .iter()
                .filter_map(|&u| self.saturated_mask(u, offset, is_left))
                .collect();
            family.sort_unstable();
            let own_pure = if is_left { self.pure_left } else { self.pure_right };
            let key = match self.cylinder_base(&family, own_pure) {
                Some(base) => Key::Cylinder(base),
                None if is_left => Key::Left(family.clone()),
                None => Key::Right(family.clone()),
            };
            families.push(family);
            keys.push(key);
        }
        self.families = families;
        self.keys = keys;
    }

    /// If every admissible set of mixed blocks appears with all
    /// `2^|own_pure|` extensions, the sorted list of those mixed sets.
    fn cylinder_base(&self, family: &[Mask], own_pure: Mask) -> Option<Vec<Mask>> {
        let needed = cylinder_size(own_pure.count_ones());
        let mut groups: BTreeMap<Mask, u128> = BTreeMap::new();
        for &a in family {
            *groups.entry(a & self.mixed).or_default() += 1;
        }
        groups
            .values()
            .all(|&c| c == needed)
            .then(|| groups.keys().copied().collect())
    }

    /// Whether `U(A)` is a neighbourhood of state `x` of the sum.
    fn admits(&self, x: usize, n1: usize, a: Mask) -> bool {
        let visible = if x < n1 {
            self.pure_left | self.mixed
        } else {
            self.pure_right | self.mixed
        };
        self.families[x].binary_search(&(a & visible)).is_ok()
    }

    /// A set of blocks on which `x` and `y` (same block, different keys)
    /// disagree.
    fn separating_set(&self, x: usize, y: usize, n1: usize) -> Mask {
        let found = match (x < n1, y < n1) {
            (true, true) | (false, false) => sym_diff_first(&self.families[x], &self.families[y]),
            _ => {
                let (l, r) = if x < n1 { (x, y) } else { (y, x) };
                self.mixed_side_split(l, self.pure_left, r, n1)
                    .or_else(|| self.mixed_side_split(r, self.pure_right, l, n1))
                    .or_else(|| match (&self.keys[l], &self.keys[r]) {
                        (Key::Cylinder(q1), Key::Cylinder(q2)) => sym_diff_first(q1, q2),
                        _ => None,
                    })
            }
        };
        let a = found.expect("states with different keys are separated by some set of blocks");
        debug_assert_ne!(self.admits(x, n1, a), self.admits(y, n1, a));
        a
    }

    /// For `x` whose family is not a cylinder over `own_pure`: two sets
    /// differing only on `own_pure`, one admitted by `x` and one not; `other`
    /// cannot see the difference, so one of them separates.
    fn mixed_side_split(&self, x: usize, own_pure: Mask, other: usize, n1: usize) -> Option<Mask> {
        if !matches!(self.keys[x], Key::Left(_) | Key::Right(_)) {
            return None;
        }
        let family = &self.families[x];
        for &member in family {
            let base = member & self.mixed;
            let missing = submasks_descending(own_pure)
                .map(|z| base | z)
                .find(|a| family.binary_search(a).is_err());
            if let Some(non_member) = missing {
                return Some(if self.admits(other, n1, member) {
                    non_member
                } else {
                    member
                });
            }
        }
        None
    }
}

fn sym_diff_first(a: &[Mask], b: &[Mask]) -> Option<Mask> {
    let only_a = a.iter().find(|m| b.binary_search(m).is_err());
    only_a
        .or_else(|| b.iter().find(|m| a.binary_search(m).is_err()))
        .copied()
}

/// Canonical block numbering by least member.
fn number_by_keys<K: Eq + std::hash::Hash>(keys: Vec<K>) -> Vec<usize> {
    let mut ids: HashMap<K, usize> = HashMap::new();
    keys.into_iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k).or_insert(next)
        })
        .collect()
}

/// The refinement rounds for a pair of models, kept so that defining and
/// distinguishing formulas can be produced afterwards.
#[derive(Debug)]
pub struct Refinement<'a> {
    left: &'a NeighbourhoodModel,
    right: &'a NeighbourhoodModel,
    atoms: Vec<u32>,
    rounds: Vec<Round>,
    formulas: RefCell<HashMap<(usize, usize), Formula>>,
}

impl<'a> Refinement<'a> {
    pub fn new(left: &'a NeighbourhoodModel, right: &'a NeighbourhoodModel) -> Self {
        let n1 = left.len();
        let atoms: Vec<u32> = shared_support(left, right).into_iter().collect();
        let profiles: Vec<Vec<bool>> = (0..n1 + right.len())
            .map(|x| {
                let (model, s) = if x < n1 { (left, x) } else { (right, x - n1) };
                atoms.iter().map(|&p| model.valuation(p).contains(s)).collect()
            })
            .collect();
        let mut current = Round::new(number_by_keys(profiles), n1, Vec::new());
        let mut rounds = Vec::new();
        loop {
            current.compute_signatures(left, right);
            let keys: Vec<(usize, Key)> = current
                .block_of
                .iter()
                .copied()
                .zip(current.keys.iter().cloned())
                .collect();
            let block_of = number_by_keys(keys);
            let count = block_of.iter().max().map_or(0, |m| m + 1);
            let stable = count == current.len();
            let mut parent = vec![0; count];
            for (x, &b) in block_of.iter().enumerate() {
                parent[b] = current.block_of[x];
            }
            rounds.push(current);
            if stable {
                break;
            }
            current = Round::new(block_of, n1, parent);
        }
        Refinement {
            left,
            right,
            atoms,
            rounds,
            formulas: RefCell::new(HashMap::new()),
        }
    }

    fn n1(&self) -> usize {
        self.left.len()
    }

    fn last(&self) -> &Round {
        self.rounds.last().expect("at least one round")
    }

    /// Number of partitions computed; the last one is stable.
    pub fn rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Final blocks as (left part, right part).
    pub fn blocks(&self) -> &[(StateSet, StateSet)] {
        &self.last().blocks
    }

    pub fn related(&self, s1: usize, s2: usize) -> bool {
        let last = self.last();
        last.block_of[s1] == last.block_of[self.n1() + s2]
    }

    /// Pairs of left and right states in the same final block.
    pub fn relation(&self) -> Relation {
        let mut rel = Relation::empty(self.left.len(), self.right.len());
        for &(l, r) in self.blocks() {
            for a in l.iter() {
                for b in r.iter() {
                    rel.insert(a, b);
                }
            }
        }
        rel
    }

    /// The final partition of the left model alone.
    pub fn left_partition(&self) -> Partition {
        Partition::from_keys(&self.last().block_of[..self.n1()])
    }

    fn evaluate(&self, x: usize, phi: &Formula) -> bool {
        let n1 = self.n1();
        if x < n1 {
            self.left.truth_set(phi).contains(x)
        } else {
            self.right.truth_set(phi).contains(x - n1)
        }
    }

    /// A formula true exactly on block `b` of round `r` (on both sides).
    pub fn block_formula(&self, r: usize, b: usize) -> Formula {
        if let Some(f) = self.formulas.borrow().get(&(r, b)) {
            return f.clone();
        }
        let round = &self.rounds[r];
        let rep = round
            .block_of
            .iter()
            .position(|&c| c == b)
            .expect("nonempty block");
        let formula = if r == 0 {
            let (model, s) = if rep < self.n1() {
                (self.left, rep)
            } else {
                (self.right, rep - self.n1())
            };
            Formula::conjunction(self.atoms.iter().map(|&p| {
                if model.valuation(p).contains(s) {
                    Formula::atom(p)
                } else {
                    Formula::not(Formula::atom(p))
                }
            }))
        } else {
            let parent = round.parent[b];
            let siblings: Vec<usize> = (0..round.len())
                .filter(|&c| c != b && round.parent[c] == parent)
                .collect();
            let base = self.block_formula(r - 1, parent);
            if siblings.is_empty() {
                base
            } else {
                let separators = siblings.into_iter().map(|c| {
                    let other = round.block_of.iter().position(|&d| d == c).expect("nonempty");
                    self.split_formula(r - 1, rep, other)
                });
                Formula::conjunction(std::iter::once(base).chain(separators))
            }
        };
        self.formulas.borrow_mut().insert((r, b), formula.clone());
        formula
    }

    /// Formula for the union of the blocks of round `r` selected by `a`.
    fn union_formula(&self, r: usize, a: Mask) -> Formula {
        let k = self.rounds[r].len();
        let chosen = a.count_ones() as usize;
        if chosen <= k - chosen {
            Formula::disjunction(
                (0..k)
                    .filter(|&b| a & bit(b) != 0)
                    .map(|b| self.block_formula(r, b)),
            )
        } else {
            Formula::not(Formula::disjunction(
                (0..k)
                    .filter(|&b| a & bit(b) == 0)
                    .map(|b| self.block_formula(r, b)),
            ))
        }
    }

    /// `x` and `y` share a block in round `r` but have different keys; a box
    /// formula (or its negation) true at `x` and false at `y`.
    fn split_formula(&self, r: usize, x: usize, y: usize) -> Formula {
        let round = &self.rounds[r];
        let a = round.separating_set(x, y, self.n1());
        let boxed = Formula::boxed(self.union_formula(r, a));
        if round.admits(x, self.n1(), a) {
            boxed
        } else {
            Formula::not(boxed)
        }
    }

    /// `None` iff the states are related; otherwise a formula whose truth
    /// value differs at `s1` (left) and `s2` (right), verified by the model
    /// checker.
    pub fn distinguishing_formula(&self, s1: usize, s2: usize) -> Option<Formula> {
        let (x, y) = (s1, self.n1() + s2);
        let r = self
            .rounds
            .iter()
            .position(|round| round.block_of[x] != round.block_of[y]);
        let formula = match r? {
            0 => {
                let p = *self
                    .atoms
                    .iter()
                    .find(|&&p| self.left.valuation(p).contains(s1) != self.right.valuation(p).contains(s2))
                    .expect("round 0 splits by atoms");
                Formula::atom(p)
            }
            r => self.split_formula(r - 1, x, y),
        };
        assert_ne!(
            self.evaluate(x, &formula),
            self.evaluate(y, &formula),
            "distinguishing formula failed to verify"
        );
        Some(formula)
    }

    pub fn report(&self) -> EquivalenceReport {
        let relation = self.relation();
        let mut certificates = Vec::new();
        for a in 0..self.left.len() {
            for b in 0..self.right.len() {
                if let Some(formula) = self.distinguishing_formula(a, b) {
                    certificates.push(Certificate {
                        left: a,
                        right: b,
                        violation: Violation::Distinguished { formula },
                    });
                }
            }
        }
        EquivalenceReport {
            kind: Kind::Behavioural,
            relation,
            certificates,
        }
    }
}

/// Pairs related by the largest congruence on `M1 + M2`.
pub fn behavioural_equivalence(left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> Relation {
    Refinement::new(left, right).relation()
}

pub fn behavioural_report(left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> EquivalenceReport {
    Refinement::new(left, right).report()
}

pub fn distinguishing_formula(
    left: &NeighbourhoodModel,
    s1: usize,
    right: &NeighbourhoodModel,
    s2: usize,
) -> Option<Formula> {
    Refinement::new(left, right).distinguishing_formula(s1, s2)
}

/// The largest congruence of a single model.
pub fn largest_congruence(model: &NeighbourhoodModel) -> Partition {
    let empty = NeighbourhoodModel::empty();
    Refinement::new(model, &empty).left_partition()
}
