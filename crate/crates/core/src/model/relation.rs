use std::collections::BTreeSet;

use super::set::StateSet;
use super::ModelError;

/// A finite relation between a carrier of `dom_size` states and one of
/// `cod_size` states.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    dom_size: usize,
    cod_size: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl Relation {
    pub fn empty(dom_size: usize, cod_size: usize) -> Self {
        Relation {
            dom_size,
            cod_size,
            pairs: BTreeSet::new(),
        }
    }

    pub fn new<I>(dom_size: usize, cod_size: usize, pairs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut rel = Relation::empty(dom_size, cod_size);
        for (a, b) in pairs {
            if a >= dom_size || b >= cod_size {
                return Err(ModelError::PairOutOfRange { left: a, right: b });
            }
            rel.pairs.insert((a, b));
        }
        Ok(rel)
    }

    pub fn identity(n: usize) -> Self {
        Relation {
            dom_size: n,
            cod_size: n,
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    pub fn full(dom_size: usize, cod_size: usize) -> Self {
        Relation {
            dom_size,
            cod_size,
            pairs: (0..dom_size)
                .flat_map(|a| (0..cod_size).map(move |b| (a, b)))
                .collect(),
        }
    }

    pub fn dom_size(&self) -> usize {
        self.dom_size
    }

    pub fn cod_size(&self) -> usize {
        self.cod_size
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        assert!(a < self.dom_size && b < self.cod_size, "pair out of range");
        self.pairs.insert((a, b));
    }

    pub fn remove(&mut self, a: usize, b: usize) -> bool {
        self.pairs.remove(&(a, b))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// `dom(R)`.
    pub fn domain(&self) -> StateSet {
        self.pairs.iter().map(|&(a, _)| a).collect()
    }

    /// `rng(R)`.
    pub fn range(&self) -> StateSet {
        self.pairs.iter().map(|&(_, b)| b).collect()
    }

    /// `R[U]`.
    pub fn image(&self, set: StateSet) -> StateSet {
        self.pairs
            .iter()
            .filter(|&&(a, _)| set.contains(a))
            .map(|&(_, b)| b)
            .collect()
    }

    /// `R^{-1}[V]`.
    pub fn preimage(&self, set: StateSet) -> StateSet {
        self.pairs
            .iter()
            .filter(|&&(_, b)| set.contains(b))
            .map(|&(a, _)| a)
            .collect()
    }

    pub fn converse(&self) -> Relation {
        Relation {
            dom_size: self.cod_size,
            cod_size: self.dom_size,
            pairs: self.pairs.iter().map(|&(a, b)| (b, a)).collect(),
        }
    }

    #[must_use]
    pub fn union(&self, other: &Relation) -> Relation {
        assert_eq!((self.dom_size, self.cod_size), (other.dom_size, other.cod_size));
        Relation {
            dom_size: self.dom_size,
            cod_size: self.cod_size,
            pairs: self.pairs.union(&other.pairs).copied().collect(),
        }
    }

    #[must_use]
    pub fn intersection(&self, other: &Relation) -> Relation {
        assert_eq!((self.dom_size, self.cod_size), (other.dom_size, other.cod_size));
        Relation {
            dom_size: self.dom_size,
            cod_size: self.cod_size,
            pairs: self.pairs.intersection(&other.pairs).copied().collect(),
        }
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    /// Reflexive, symmetric and transitive on a single carrier.
    pub fn is_equivalence(&self) -> bool {
        if self.dom_size != self.cod_size {
            return false;
        }
        let n = self.dom_size;
        (0..n).all(|i| self.contains(i, i))
            && self.pairs.iter().all(|&(a, b)| self.contains(b, a))
            && self.pairs.iter().all(|&(a, b)| {
                self.pairs
                    .range((b, 0)..(b + 1, 0))
                    .all(|&(_, c)| self.contains(a, c))
            })
    }

    /// `R` viewed on the sum carrier `X1 + X2`: pairs `(inl a, inr b)`.
    pub fn on_sum(&self) -> Relation {
        let n = self.dom_size + self.cod_size;
        Relation {
            dom_size: n,
            cod_size: n,
            pairs: self.pairs.iter().map(|&(a, b)| (a, self.dom_size + b)).collect(),
        }
    }
}

/// A total function between finite carriers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateFunction {
    map: Vec<usize>,
    cod_size: usize,
}

impl StateFunction {
    pub fn new(map: Vec<usize>, cod_size: usize) -> Result<Self, ModelError> {
        if let Some((state, &target)) = map.iter().enumerate().find(|(_, &t)| t >= cod_size) {
            return Err(ModelError::ImageOutOfRange { state, target });
        }
        Ok(StateFunction { map, cod_size })
    }

    pub fn identity(n: usize) -> Self {
        StateFunction {
            map: (0..n).collect(),
            cod_size: n,
        }
    }

    pub fn constant(dom_size: usize, cod_size: usize, target: usize) -> Self {
        assert!(target < cod_size);
        StateFunction {
            map: vec![target; dom_size],
            cod_size,
        }
    }

    pub fn dom_size(&self) -> usize {
        self.map.len()
    }

    pub fn cod_size(&self) -> usize {
        self.cod_size
    }

    pub fn apply(&self, s: usize) -> usize {
        self.map[s]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// `f[U]`.
    pub fn image(&self, set: StateSet) -> StateSet {
        set.iter().map(|s| self.map[s]).collect()
    }

    /// `f^{-1}[X]`.
    pub fn preimage(&self, set: StateSet) -> StateSet {
        self.map
            .iter()
            .enumerate()
            .filter(|(_, &t)| set.contains(t))
            .map(|(s, _)| s)
            .collect()
    }

    /// `f[S1]`.
    pub fn range(&self) -> StateSet {
        self.map.iter().copied().collect()
    }

    /// `self` after `first`: `s -> self(first(s))`.
    pub fn after(&self, first: &StateFunction) -> StateFunction {
        assert_eq!(first.cod_size, self.dom_size(), "composition mismatch");
        StateFunction {
            map: first.map.iter().map(|&t| self.map[t]).collect(),
            cod_size: self.cod_size,
        }
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod_size];
        self.map.iter().all(|&t| !std::mem::replace(&mut seen[t], true))
    }

    pub fn is_surjective(&self) -> bool {
        self.range().len() == self.cod_size
    }

    pub fn graph(&self) -> Relation {
        Relation {
            dom_size: self.dom_size(),
            cod_size: self.cod_size,
            pairs: self.map.iter().copied().enumerate().collect(),
        }
    }
}
