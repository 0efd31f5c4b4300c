//! Disjoint unions, equivalence closures, quotients, pushouts, pullbacks and
//! kernels of finite models and relations.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use thiserror::Error;

use crate::equivalence::{self, Certificate, Verdict};
use crate::model::{Collection, NeighbourhoodModel, Relation, StateFunction, StateSet, MAX_STATES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("combined carrier of {0} states exceeds the supported maximum of {MAX_STATES}")]
    TooManyStates(usize),
    #[error("relation is not an equivalence relation")]
    NotAnEquivalence,
    #[error("relation is not a congruence: {0}")]
    NotACongruence(Certificate),
    #[error("functions do not share a codomain ({0} vs {1} states)")]
    CodomainMismatch(usize, usize),
    #[error("relation does not match the carriers")]
    ShapeMismatch,
    #[error("maps do not agree on the relation, so no mediating map exists")]
    NoMediatingMap,
}

/// A partition of `{0, .., n-1}` with blocks ordered by least member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<StateSet>,
}

impl Partition {
    /// States with equal keys share a block.
    pub fn from_keys<K: Eq + Hash>(keys: &[K]) -> Partition {
        let mut ids: HashMap<&K, usize> = HashMap::new();
        let mut block_of = Vec::with_capacity(keys.len());
        let mut blocks: Vec<StateSet> = Vec::new();
        for (s, key) in keys.iter().enumerate() {
            let next = ids.len();
            let id = *ids.entry(key).or_insert(next);
            if id == blocks.len() {
                blocks.push(StateSet::EMPTY);
            }
            blocks[id].insert(s);
            block_of.push(id);
        }
        // ids were handed out in order of least member already
        Partition { block_of, blocks }
    }

    pub fn discrete(n: usize) -> Partition {
        Partition::from_keys(&(0..n).collect::<Vec<_>>())
    }

    pub fn from_equivalence(rel: &Relation) -> Result<Partition, ConstructionError> {
        if !rel.is_equivalence() {
            return Err(ConstructionError::NotAnEquivalence);
        }
        Ok(Partition::of_closure(rel))
    }

    /// Classes of the equivalence closure of a relation on one carrier.
    fn of_closure(rel: &Relation) -> Partition {
        let n = rel.dom_size();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (a, b) in rel.iter() {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let roots: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
        Partition::from_keys(&roots)
    }

    pub fn carrier_len(&self) -> usize {
        self.block_of.len()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, s: usize) -> usize {
        self.block_of[s]
    }

    pub fn blocks(&self) -> &[StateSet] {
        &self.blocks
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    /// The quotient map `s -> block(s)`.
    pub fn quotient_map(&self) -> StateFunction {
        StateFunction::new(self.block_of.clone(), self.blocks.len()).expect("block ids in range")
    }

    pub fn to_relation(&self) -> Relation {
        let n = self.carrier_len();
        let pairs = self
            .blocks
            .iter()
            .flat_map(|b| b.iter().flat_map(move |x| b.iter().map(move |y| (x, y))));
        Relation::new(n, n, pairs).expect("pairs in range")
    }

    /// Union of the blocks selected by `mask` (bit `i` selects block `i`).
    pub fn union_of(&self, mask: u64) -> StateSet {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .fold(StateSet::EMPTY, |acc, (_, &b)| acc.union(b))
    }

    /// Whether `set` is a union of blocks.
    pub fn is_saturated(&self, set: StateSet) -> bool {
        self.blocks
            .iter()
            .all(|&b| b.is_subset(set) || b.intersection(set).is_empty())
    }
}

/// Reflexive, symmetric, transitive closure of a relation on one carrier.
pub fn eq_closure(rel: &Relation) -> Relation {
    assert_eq!(rel.dom_size(), rel.cod_size(), "closure needs a single carrier");
    Partition::of_closure(rel).to_relation()
}

/// `M1 + M2` with its two injections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjointUnion {
    pub model: NeighbourhoodModel,
    pub inl: StateFunction,
    pub inr: StateFunction,
}

impl DisjointUnion {
    /// The copairing `[f, g]: M1 + M2 -> N`.
    pub fn copair(&self, f: &StateFunction, g: &StateFunction) -> StateFunction {
        assert_eq!(f.cod_size(), g.cod_size(), "copairing needs a common codomain");
        let map = f.as_slice().iter().chain(g.as_slice()).copied().collect();
        StateFunction::new(map, f.cod_size()).expect("copairing in range")
    }
}

pub fn tag_left(name: &str) -> String {
    format!("L:{name}")
}

pub fn tag_right(name: &str) -> String {
    format!("R:{name}")
}

/// Disjoint union: for `s` from `Mi`, `X in nu(s)` iff `X` restricted to
/// `Si` is in `nu_i(s)`. State names are tagged `L:` and `R:`.
pub fn disjoint_union(
    left: &NeighbourhoodModel,
    right: &NeighbourhoodModel,
) -> Result<DisjointUnion, ConstructionError> {
    let (n1, n2) = (left.len(), right.len());
    if n1 + n2 > MAX_STATES {
        return Err(ConstructionError::TooManyStates(n1 + n2));
    }
    let states = left
        .states()
        .iter()
        .map(|n| tag_left(n))
        .chain(right.states().iter().map(|n| tag_right(n)))
        .collect();
    let right_part = StateSet::full(n2).shifted(n1);
    let left_part = StateSet::full(n1);
    let mut nbhd = Vec::with_capacity(n1 + n2);
    for s in 0..n1 {
        let c: Collection = left
            .neighbourhoods(s)
            .iter()
            .flat_map(|&u| right_part.subsets().map(move |extra| u.union(extra)))
            .collect();
        nbhd.push(c);
    }
    for s in 0..n2 {
        let c: Collection = right
            .neighbourhoods(s)
            .iter()
            .flat_map(|&u| {
                let shifted = u.shifted(n1);
                left_part.subsets().map(move |extra| shifted.union(extra))
            })
            .collect();
        nbhd.push(c);
    }
    let mut valuation = BTreeMap::new();
    for atom in left.atom_support().union(&right.atom_support()) {
        let set = left.valuation(*atom).union(right.valuation(*atom).shifted(n1));
        valuation.insert(*atom, set);
    }
    let model = NeighbourhoodModel::from_parts(states, nbhd, valuation)
        .map_err(|_| ConstructionError::TooManyStates(n1 + n2))?;
    let inl = StateFunction::new((0..n1).collect(), n1 + n2).expect("inl");
    let inr = StateFunction::new((n1..n1 + n2).collect(), n1 + n2).expect("inr");
    Ok(DisjointUnion { model, inl, inr })
}

/// A quotient model with its quotient map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub model: NeighbourhoodModel,
    pub map: StateFunction,
    pub partition: Partition,
}

impl Quotient {
    /// The unique `h` with `h . map = g`, for `g` constant on every block.
    pub fn factor(&self, g: &StateFunction) -> Result<StateFunction, ConstructionError> {
        if g.dom_size() != self.partition.carrier_len() {
            return Err(ConstructionError::ShapeMismatch);
        }
        let mut map = Vec::with_capacity(self.partition.len());
        for block in self.partition.blocks() {
            let image = g.image(*block);
            if image.len() != 1 {
                return Err(ConstructionError::NoMediatingMap);
            }
            map.push(image.first().expect("singleton"));
        }
        Ok(StateFunction::new(map, g.cod_size()).expect("factor in range"))
    }
}

/// Quotient by a congruence: `Y in nu_Q([s])` iff `eps^{-1}[Y] in nu(s)`,
/// `V_Q(p) = eps[V(p)]`. Blocks are named after their least member.
pub fn quotient(model: &NeighbourhoodModel, rel: &Relation) -> Result<Quotient, ConstructionError> {
    if rel.dom_size() != model.len() || rel.cod_size() != model.len() {
        return Err(ConstructionError::ShapeMismatch);
    }
    match equivalence::is_congruence(rel, model) {
        Err(_) => return Err(ConstructionError::NotAnEquivalence),
        Ok(Verdict::Fails(cert)) => return Err(ConstructionError::NotACongruence(cert)),
        Ok(Verdict::Holds) => {}
    }
    let partition = Partition::from_equivalence(rel)?;
    Ok(quotient_by_partition(model, partition))
}

/// Quotient by a partition already known to be a congruence.
pub(crate) fn quotient_by_partition(model: &NeighbourhoodModel, partition: Partition) -> Quotient {
    let map = partition.quotient_map();
    let states = partition
        .blocks()
        .iter()
        .map(|b| model.name(b.first().expect("nonempty block")).to_string())
        .collect();
    let nbhd = partition
        .blocks()
        .iter()
        .map(|b| {
            let rep = b.first().expect("nonempty block");
            model
                .neighbourhoods(rep)
                .iter()
                .filter(|&&u| partition.is_saturated(u))
                .map(|&u| map.image(u))
                .collect()
        })
        .collect();
    let valuation = model
        .valuations()
        .iter()
        .map(|(&p, &set)| (p, map.image(set)))
        .collect();
    let quotient = NeighbourhoodModel::from_parts(states, nbhd, valuation).expect("quotient is well formed");
    debug_assert!(crate::model::is_bounded_morphism(
        &map,
        model,
        &quotient,
        &model.atom_support()
    ));
    Quotient {
        model: quotient,
        map,
        partition,
    }
}

/// Pushout of a relation `R <= X1 x X2` in the category of sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushoutResult {
    /// One name per block: the least member, tagged with its side.
    pub names: Vec<String>,
    /// Blocks of `(X1 + X2) / eq-closure(R12)`, over the sum carrier.
    pub blocks: Vec<StateSet>,
    pub left: StateFunction,
    pub right: StateFunction,
}

impl PushoutResult {
    /// The unique `m: P -> Q` with `m . p1 = q1` and `m . p2 = q2`, provided
    /// `q1 . pi1 = q2 . pi2` on `R`.
    pub fn mediating_map(
        &self,
        rel: &Relation,
        q1: &StateFunction,
        q2: &StateFunction,
    ) -> Result<StateFunction, ConstructionError> {
        if q1.cod_size() != q2.cod_size() {
            return Err(ConstructionError::CodomainMismatch(q1.cod_size(), q2.cod_size()));
        }
        if q1.dom_size() != self.left.dom_size() || q2.dom_size() != self.right.dom_size() {
            return Err(ConstructionError::ShapeMismatch);
        }
        if rel.iter().any(|(a, b)| q1.apply(a) != q2.apply(b)) {
            return Err(ConstructionError::NoMediatingMap);
        }
        let mut map = vec![None; self.blocks.len()];
        let sides = [(&self.left, q1), (&self.right, q2)];
        for (p, q) in sides {
            for x in 0..p.dom_size() {
                let slot = &mut map[p.apply(x)];
                match *slot {
                    None => *slot = Some(q.apply(x)),
                    Some(y) if y != q.apply(x) => return Err(ConstructionError::NoMediatingMap),
                    Some(_) => {}
                }
            }
        }
        let map = map
            .into_iter()
            .map(|m| m.expect("p1, p2 jointly surjective"))
            .collect();
        Ok(StateFunction::new(map, q1.cod_size()).expect("in range"))
    }
}

pub fn pushout(
    rel: &Relation,
    left: &[String],
    right: &[String],
) -> Result<PushoutResult, ConstructionError> {
    let (n1, n2) = (left.len(), right.len());
    if rel.dom_size() != n1 || rel.cod_size() != n2 {
        return Err(ConstructionError::ShapeMismatch);
    }
    if n1 + n2 > MAX_STATES {
        return Err(ConstructionError::TooManyStates(n1 + n2));
    }
    let partition = Partition::of_closure(&rel.on_sum());
    let names = partition
        .blocks()
        .iter()
        .map(|b| {
            let least = b.first().expect("nonempty block");
            if least < n1 {
                tag_left(&left[least])
            } else {
                tag_right(&right[least - n1])
            }
        })
        .collect();
    let map = partition.quotient_map();
    let left_map = StateFunction::new((0..n1).map(|x| map.apply(x)).collect(), partition.len()).expect("p1");
    let right_map =
        StateFunction::new((0..n2).map(|y| map.apply(n1 + y)).collect(), partition.len()).expect("p2");
    Ok(PushoutResult {
        names,
        blocks: partition.blocks().to_vec(),
        left: left_map,
        right: right_map,
    })
}

/// `ker(f) = {(s, s') | f(s) = f(s')}`.
pub fn kernel(f: &StateFunction) -> Relation {
    pullback(f, f).expect("same codomain")
}

/// `pb(f1, f2) = {(x1, x2) | f1(x1) = f2(x2)}`.
pub fn pullback(f1: &StateFunction, f2: &StateFunction) -> Result<Relation, ConstructionError> {
    if f1.cod_size() != f2.cod_size() {
        return Err(ConstructionError::CodomainMismatch(f1.cod_size(), f2.cod_size()));
    }
    let pairs = (0..f1.dom_size())
        .flat_map(|a| (0..f2.dom_size()).map(move |b| (a, b)))
        .filter(|&(a, b)| f1.apply(a) == f2.apply(b));
    Ok(Relation::new(f1.dom_size(), f2.dom_size(), pairs).expect("pairs in range"))
}
