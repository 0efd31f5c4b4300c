//! Finite neighbourhood models, truth evaluation and the morphism and
//! coherence predicates everything else is built on.
//!
//! States are identified by name; internally a state is its position in the
//! declaration order and subsets of the carrier are [`StateSet`] bit-vectors.
//! A neighbourhood collection is a canonical sorted set of such bit-vectors.

pub(crate) mod json;
mod relation;
mod set;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::syntax::Formula;

pub use json::{ModelFile, NamedRelation};
pub use relation::{Relation, StateFunction};
pub use set::{StateSet, MAX_STATES};

/// A collection of neighbourhoods of one state.
pub type Collection = BTreeSet<StateSet>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate state name {0:?}")]
    DuplicateState(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("carrier of {0} states exceeds the supported maximum of {MAX_STATES}")]
    TooManyStates(usize),
    #[error("duplicate neighbourhood in the collection of {state:?}")]
    DuplicateNeighbourhood { state: String },
    #[error("duplicate member {member:?} in a set")]
    DuplicateMember { member: String },
    #[error("set is not contained in the carrier")]
    SetOutOfRange,
    #[error("pair ({left}, {right}) out of range")]
    PairOutOfRange { left: usize, right: usize },
    #[error("state {state} is mapped to {target}, outside the codomain")]
    ImageOutOfRange { state: usize, target: usize },
    #[error("function maps {given} states but the domain has {expected}")]
    NotTotal { given: usize, expected: usize },
    #[error("malformed atom name {0:?} (expected pN)")]
    BadAtomName(String),
    #[error("atom {0:?} has a valuation but is not declared")]
    UndeclaredAtom(String),
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// A finite neighbourhood model `(S, nu, V)` with a declared atom support.
///
/// Atoms outside the support are false everywhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighbourhoodModel {
    states: Vec<String>,
    index: HashMap<String, usize>,
    nbhd: Vec<Collection>,
    valuation: BTreeMap<u32, StateSet>,
}

impl NeighbourhoodModel {
    /// Builds a model from index-based data, validating every set against
    /// the carrier.
    pub fn from_parts(
        states: Vec<String>,
        nbhd: Vec<Collection>,
        valuation: BTreeMap<u32, StateSet>,
    ) -> Result<Self, ModelError> {
        let n = states.len();
        if n > MAX_STATES {
            return Err(ModelError::TooManyStates(n));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, name) in states.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(ModelError::DuplicateState(name.clone()));
            }
        }
        if nbhd.len() != n {
            return Err(ModelError::NotTotal {
                given: nbhd.len(),
                expected: n,
            });
        }
        let in_range = |set: &StateSet| set.is_within(n);
        if !nbhd.iter().all(|c| c.iter().all(in_range)) || !valuation.values().all(in_range) {
            return Err(ModelError::SetOutOfRange);
        }
        Ok(NeighbourhoodModel {
            states,
            index,
            nbhd,
            valuation,
        })
    }

    pub fn builder<I, S>(states: I) -> ModelBuilder
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ModelBuilder::new(states)
    }

    /// The model with no states.
    pub fn empty() -> Self {
        NeighbourhoodModel::from_parts(vec![], vec![], BTreeMap::new()).expect("empty model")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn state(&self, name: &str) -> Result<usize, ModelError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn carrier(&self) -> StateSet {
        StateSet::full(self.len())
    }

    pub fn set_of<'a, I>(&self, names: I) -> Result<StateSet, ModelError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut set = StateSet::EMPTY;
        for name in names {
            let i = self.state(name)?;
            if set.contains(i) {
                return Err(ModelError::DuplicateMember {
                    member: name.to_string(),
                });
            }
            set.insert(i);
        }
        Ok(set)
    }

    pub fn names_of(&self, set: StateSet) -> Vec<&str> {
        set.iter().map(|i| self.name(i)).collect()
    }

    /// `nu(s)`.
    pub fn neighbourhoods(&self, s: usize) -> &Collection {
        &self.nbhd[s]
    }

    pub fn has_neighbourhood(&self, s: usize, set: StateSet) -> bool {
        self.nbhd[s].contains(&set)
    }

    pub fn atom_support(&self) -> BTreeSet<u32> {
        self.valuation.keys().copied().collect()
    }

    /// `V(p)`; empty for atoms outside the support.
    pub fn valuation(&self, atom: u32) -> StateSet {
        self.valuation.get(&atom).copied().unwrap_or_default()
    }

    pub fn valuations(&self) -> &BTreeMap<u32, StateSet> {
        &self.valuation
    }

    /// Atoms of `atoms` that are true at `s`, as a sorted list.
    pub fn atom_profile(&self, s: usize, atoms: &BTreeSet<u32>) -> Vec<u32> {
        atoms
            .iter()
            .copied()
            .filter(|&p| self.valuation(p).contains(s))
            .collect()
    }

    /// Truth set `[[phi]]`.
    pub fn truth_set(&self, phi: &Formula) -> StateSet {
        match phi {
            Formula::Bottom => StateSet::EMPTY,
            Formula::Atom(p) => self.valuation(*p),
            Formula::Not(f) => self.truth_set(f).complement(self.len()),
            Formula::And(a, b) => self.truth_set(a).intersection(self.truth_set(b)),
            Formula::Box(f) => self.boxtimes(self.truth_set(f)),
        }
    }

    pub fn satisfies(&self, s: usize, phi: &Formula) -> Result<bool, ModelError> {
        if s >= self.len() {
            return Err(ModelError::StateOutOfRange(s));
        }
        Ok(self.truth_set(phi).contains(s))
    }

    pub fn satisfies_named(&self, state: &str, phi: &Formula) -> Result<bool, ModelError> {
        self.satisfies(self.state(state)?, phi)
    }

    /// `{ s | U in nu(s) }`.
    pub fn boxtimes(&self, set: StateSet) -> StateSet {
        (0..self.len()).filter(|&s| self.nbhd[s].contains(&set)).collect()
    }

    pub fn try_boxtimes(&self, set: StateSet) -> Result<StateSet, ModelError> {
        if !set.is_within(self.len()) {
            return Err(ModelError::SetOutOfRange);
        }
        Ok(self.boxtimes(set))
    }

    /// Same carrier and neighbourhoods, valuation replaced.
    pub fn with_valuation(&self, valuation: BTreeMap<u32, StateSet>) -> Result<Self, ModelError> {
        NeighbourhoodModel::from_parts(self.states.clone(), self.nbhd.clone(), valuation)
    }
}

/// Name-based incremental construction of a [`NeighbourhoodModel`].
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    states: Vec<String>,
    nbhd: Vec<(String, Vec<String>)>,
    valuation: Vec<(u32, Vec<String>)>,
}

impl ModelBuilder {
    pub fn new<I, S>(states: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ModelBuilder {
            states: states.into_iter().map(Into::into).collect(),
            nbhd: Vec::new(),
            valuation: Vec::new(),
        }
    }

    /// Adds one neighbourhood to the collection of `state`.
    pub fn neighbourhood(mut self, state: &str, members: &[&str]) -> Self {
        self.nbhd
            .push((state.to_string(), members.iter().map(|m| m.to_string()).collect()));
        self
    }

    /// Declares the atom and sets its truth set.
    pub fn atom(mut self, atom: u32, members: &[&str]) -> Self {
        self.valuation
            .push((atom, members.iter().map(|m| m.to_string()).collect()));
        self
    }

    pub fn build(self) -> Result<NeighbourhoodModel, ModelError> {
        let n = self.states.len();
        let skeleton =
            NeighbourhoodModel::from_parts(self.states, vec![Collection::new(); n], BTreeMap::new())?;
        let mut nbhd = vec![Collection::new(); n];
        for (state, members) in &self.nbhd {
            let s = skeleton.state(state)?;
            let set = skeleton.set_of(members.iter().map(String::as_str))?;
            if !nbhd[s].insert(set) {
                return Err(ModelError::DuplicateNeighbourhood { state: state.clone() });
            }
        }
        let mut valuation = BTreeMap::new();
        for (atom, members) in &self.valuation {
            valuation.insert(*atom, skeleton.set_of(members.iter().map(String::as_str))?);
        }
        NeighbourhoodModel::from_parts(skeleton.states, nbhd, valuation)
    }
}

/// `2^2(f)(N) = { D subset of Y | f^{-1}[D] in N }`.
pub fn functor_image(f: &StateFunction, collection: &Collection) -> Result<Collection, ModelError> {
    if !collection.iter().all(|u| u.is_within(f.dom_size())) {
        return Err(ModelError::SetOutOfRange);
    }
    let mut out = Collection::new();
    let range = f.range();
    let outside = StateSet::full(f.cod_size()).difference(range);
    // f^{-1}[D] only depends on D within f[X]; the rest of D is free
    for &u in collection {
        let image = f.image(u);
        if f.preimage(image) != u {
            continue;
        }
        for extra in outside.subsets() {
            out.insert(image.union(extra));
        }
    }
    Ok(out)
}

/// `R[U1] <= U2` and `R^{-1}[U2] <= U1`.
pub fn is_coherent_pair(rel: &Relation, left: StateSet, right: StateSet) -> bool {
    rel.image(left).is_subset(right) && rel.preimage(right).is_subset(left)
}

/// `U` is coherent for a relation on a single carrier.
pub fn is_coherent_set(rel: &Relation, set: StateSet) -> bool {
    is_coherent_pair(rel, set, set)
}

/// Equivalent formulations of pair coherence; each must agree with
/// [`is_coherent_pair`].
pub mod coherence {
    use super::{Relation, StateSet};

    /// For all `(x1, x2)` in `R`: `x1 in U1` iff `x2 in U2`.
    pub fn pointwise(rel: &Relation, left: StateSet, right: StateSet) -> bool {
        rel.iter().all(|(a, b)| left.contains(a) == right.contains(b))
    }

    /// `pi1^{-1}[U1] = pi2^{-1}[U2]` as sets of pairs of `R`.
    pub fn projections_agree(rel: &Relation, left: StateSet, right: StateSet) -> bool {
        let via_left: Vec<_> = rel.iter().filter(|&(a, _)| left.contains(a)).collect();
        let via_right: Vec<_> = rel.iter().filter(|&(_, b)| right.contains(b)).collect();
        via_left == via_right
    }

    /// `U1 + U2` is coherent for `R` seen on the sum carrier.
    pub fn on_sum(rel: &Relation, left: StateSet, right: StateSet) -> bool {
        let sum = left.union(right.shifted(rel.dom_size()));
        super::is_coherent_set(&rel.on_sum(), sum)
    }

    /// `U` is a union of classes of the equivalence closure of `R`.
    pub fn union_of_classes(rel: &Relation, set: StateSet) -> bool {
        let closure = crate::constructions::eq_closure(rel);
        let agreed = closure.iter().all(|(a, b)| set.contains(a) == set.contains(b));
        agreed
    }
}

/// Why a function fails to be a bounded morphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphismViolation {
    /// `f^{-1}[X] in nu1(s)` and `X in nu2(f(s))` disagree.
    Neighbourhood {
        state: usize,
        target_set: StateSet,
        in_source: bool,
    },
    Atom {
        state: usize,
        atom: u32,
    },
    Shape,
}

/// First violation of the bounded-morphism condition, restricted to `atoms`.
pub fn bounded_morphism_violation(
    f: &StateFunction,
    source: &NeighbourhoodModel,
    target: &NeighbourhoodModel,
    atoms: &BTreeSet<u32>,
) -> Option<MorphismViolation> {
    if f.dom_size() != source.len() || f.cod_size() != target.len() {
        return Some(MorphismViolation::Shape);
    }
    let outside = target.carrier().difference(f.range());
    for s in 0..source.len() {
        for &p in atoms {
            if source.valuation(p).contains(s) != target.valuation(p).contains(f.apply(s)) {
                return Some(MorphismViolation::Atom { state: s, atom: p });
            }
        }
        let image_nbhd = target.neighbourhoods(f.apply(s));
        // X in nu2(f(s)) => f^{-1}[X] in nu1(s)
        for &x in image_nbhd {
            if !source.has_neighbourhood(s, f.preimage(x)) {
                return Some(MorphismViolation::Neighbourhood {
                    state: s,
                    target_set: x,
                    in_source: false,
                });
            }
        }
        // f^{-1}[X] in nu1(s) => X in nu2(f(s)); only preimage-closed U matter
        for &u in source.neighbourhoods(s) {
            let image = f.image(u);
            if f.preimage(image) != u {
                continue;
            }
            for extra in outside.subsets() {
                let x = image.union(extra);
                if !image_nbhd.contains(&x) {
                    return Some(MorphismViolation::Neighbourhood {
                        state: s,
                        target_set: x,
                        in_source: true,
                    });
                }
            }
        }
    }
    None
}

pub fn is_bounded_morphism(
    f: &StateFunction,
    source: &NeighbourhoodModel,
    target: &NeighbourhoodModel,
    atoms: &BTreeSet<u32>,
) -> bool {
    bounded_morphism_violation(f, source, target, atoms).is_none()
}

/// Bijective bounded morphism for the union of both atom supports whose
/// inverse is also bounded (automatic for bijections).
pub fn is_isomorphism(f: &StateFunction, source: &NeighbourhoodModel, target: &NeighbourhoodModel) -> bool {
    let atoms: BTreeSet<u32> = source
        .atom_support()
        .union(&target.atom_support())
        .copied()
        .collect();
    f.dom_size() == source.len()
        && f.cod_size() == target.len()
        && f.is_injective()
        && f.is_surjective()
        && is_bounded_morphism(f, source, target, &atoms)
}

/// Searches all bijections for an isomorphism; intended for small carriers.
pub fn find_isomorphism(a: &NeighbourhoodModel, b: &NeighbourhoodModel) -> Option<StateFunction> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let f = StateFunction::new(perm.clone(), n).expect("permutation");
        if is_isomorphism(&f, a, b) {
            return Some(f);
        }
        // next lexicographic permutation
        let i = (1..n).rev().find(|&i| perm[i - 1] < perm[i])?;
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).expect("successor");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}
