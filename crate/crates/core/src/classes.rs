//! Kripke models, monotonic and augmented neighbourhood models, core
//! neighbourhoods and base sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::json::parse_atom_name;
use crate::model::{Collection, ModelError, NeighbourhoodModel, Relation, StateSet};
use crate::syntax::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("model is not augmented at state {0:?}")]
    NotAugmented(String),
    #[error("model is not monotonic at state {0:?}")]
    NotMonotonic(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A finite Kripke model `(S, R, V)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    states: Vec<String>,
    edges: Relation,
    valuation: BTreeMap<u32, StateSet>,
}

/// On-disk form: `{"states": [..], "edges": [["a","b"]], "atoms": [..], "valuation": {..}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KripkeFile {
    pub states: Vec<String>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub atoms: Vec<String>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

impl KripkeModel {
    pub fn new(
        states: Vec<String>,
        edges: Relation,
        valuation: BTreeMap<u32, StateSet>,
    ) -> Result<Self, ModelError> {
        let n = states.len();
        // reuse the neighbourhood model's validation of names and sets
        NeighbourhoodModel::from_parts(states.clone(), vec![Collection::new(); n], valuation.clone())?;
        if edges.dom_size() != n || edges.cod_size() != n {
            return Err(ModelError::NotTotal {
                given: edges.dom_size(),
                expected: n,
            });
        }
        Ok(KripkeModel {
            states,
            edges,
            valuation,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: KripkeFile = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        let n = file.states.len();
        let skeleton =
            NeighbourhoodModel::from_parts(file.states.clone(), vec![Collection::new(); n], BTreeMap::new())?;
        let mut pairs = Vec::with_capacity(file.edges.len());
        for (a, b) in &file.edges {
            pairs.push((skeleton.state(a)?, skeleton.state(b)?));
        }
        let mut valuation = BTreeMap::new();
        for name in &file.atoms {
            valuation.insert(parse_atom_name(name)?, StateSet::EMPTY);
        }
        for (name, members) in &file.valuation {
            let atom = parse_atom_name(name)?;
            if !valuation.contains_key(&atom) {
                return Err(ModelError::UndeclaredAtom(name.clone()));
            }
            valuation.insert(atom, skeleton.set_of(members.iter().map(String::as_str))?);
        }
        KripkeModel::new(file.states, Relation::new(n, n, pairs)?, valuation)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let names = |set: StateSet| -> Vec<String> { set.iter().map(|i| self.states[i].clone()).collect() };
        let file = KripkeFile {
            states: self.states.clone(),
            edges: self
                .edges
                .iter()
                .map(|(a, b)| (self.states[a].clone(), self.states[b].clone()))
                .collect(),
            atoms: self.valuation.keys().map(|p| format!("p{p}")).collect(),
            valuation: self
                .valuation
                .iter()
                .map(|(p, &set)| (format!("p{p}"), names(set)))
                .collect(),
        };
        serde_json::to_value(file).expect("kripke model serialises")
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

    pub fn edges(&self) -> &Relation {
        &self.edges
    }

    pub fn valuation(&self) -> &BTreeMap<u32, StateSet> {
        &self.valuation
    }

    /// `R[s]`.
    pub fn successors(&self, s: usize) -> StateSet {
        self.edges.image(StateSet::singleton(s))
    }

    /// Relational truth set: `[]phi` holds where every successor satisfies `phi`.
    pub fn truth_set(&self, phi: &Formula) -> StateSet {
        let n = self.len();
        match phi {
            Formula::Bottom => StateSet::EMPTY,
            Formula::Atom(p) => self.valuation.get(p).copied().unwrap_or_default(),
            Formula::Not(f) => self.truth_set(f).complement(n),
            Formula::And(a, b) => self.truth_set(a).intersection(self.truth_set(b)),
            Formula::Box(f) => {
                let inner = self.truth_set(f);
                (0..n).filter(|&s| self.successors(s).is_subset(inner)).collect()
            }
        }
    }
}

/// `nu(s)` is the up-set of `R[s]`.
pub fn from_kripke(kripke: &KripkeModel) -> NeighbourhoodModel {
    let n = kripke.len();
    let nbhd = (0..n)
        .map(|s| {
            let core = kripke.successors(s);
            StateSet::full(n)
                .difference(core)
                .subsets()
                .map(|extra| core.union(extra))
                .collect()
        })
        .collect();
    NeighbourhoodModel::from_parts(kripke.states.clone(), nbhd, kripke.valuation.clone())
        .expect("augmentation of a valid Kripke model")
}

/// `R[s]` is the intersection of `nu(s)`; requires an augmented model.
pub fn to_kripke(model: &NeighbourhoodModel) -> Result<KripkeModel, ClassError> {
    let n = model.len();
    let mut pairs = Vec::new();
    for s in 0..n {
        if !is_augmented_at(model, s) {
            return Err(ClassError::NotAugmented(model.name(s).to_string()));
        }
        let core = intersection(model.neighbourhoods(s)).expect("nonempty collection");
        pairs.extend(core.iter().map(|t| (s, t)));
    }
    Ok(KripkeModel::new(
        model.states().to_vec(),
        Relation::new(n, n, pairs)?,
        model.valuations().clone(),
    )?)
}

fn intersection(collection: &Collection) -> Option<StateSet> {
    let mut iter = collection.iter().copied();
    let first = iter.next()?;
    Some(iter.fold(first, StateSet::intersection))
}

fn is_monotonic_at(model: &NeighbourhoodModel, s: usize) -> bool {
    // closure under adding one element gives closure under all supersets
    let carrier = model.carrier();
    model.neighbourhoods(s).iter().all(|&u| {
        carrier
            .difference(u)
            .iter()
            .all(|x| model.has_neighbourhood(s, u.with(x)))
    })
}

fn is_augmented_at(model: &NeighbourhoodModel, s: usize) -> bool {
    is_monotonic_at(model, s)
        && intersection(model.neighbourhoods(s)).is_some_and(|core| model.has_neighbourhood(s, core))
}

/// Every `nu(s)` is closed under supersets.
pub fn is_monotonic(model: &NeighbourhoodModel) -> bool {
    (0..model.len()).all(|s| is_monotonic_at(model, s))
}

/// Monotonic, and every `nu(s)` is nonempty and contains its intersection.
pub fn is_augmented(model: &NeighbourhoodModel) -> bool {
    (0..model.len()).all(|s| is_augmented_at(model, s))
}

/// The inclusion-minimal members of `nu(s)`.
pub fn core_neighbourhoods(model: &NeighbourhoodModel, s: usize) -> Collection {
    let collection = model.neighbourhoods(s);
    collection
        .iter()
        .copied()
        .filter(|&u| !collection.iter().any(|&v| v != u && v.is_subset(u)))
        .collect()
}

/// `D in nu(s)` iff `D & B in nu(s)` for every `D`.
pub fn is_base(model: &NeighbourhoodModel, s: usize, base: StateSet) -> bool {
    // membership depends on the trace on B only: each trace class of nu(s)
    // holds all 2^|S - B| extensions
    let free = model.carrier().difference(base);
    let needed = 1u128.checked_shl(free.len() as u32).unwrap_or(u128::MAX);
    let mut counts: BTreeMap<StateSet, u128> = BTreeMap::new();
    for &u in model.neighbourhoods(s) {
        *counts.entry(u.intersection(base)).or_default() += 1;
    }
    counts.values().all(|&c| c == needed)
}

/// The first base set of `nu(s)` in order of size, then carrier order.
pub fn minimal_base(model: &NeighbourhoodModel, s: usize) -> StateSet {
    let n = model.len();
    for k in 0..=n {
        let mut chosen: Vec<usize> = (0..k).collect();
        loop {
            let candidate: StateSet = chosen.iter().copied().collect();
            if is_base(model, s, candidate) {
                return candidate;
            }
            // next k-combination in lexicographic order
            let Some(i) = (0..k).rev().find(|&i| chosen[i] < n - k + i) else {
                break;
            };
            chosen[i] += 1;
            for j in i + 1..k {
                chosen[j] = chosen[j - 1] + 1;
            }
        }
    }
    unreachable!("the full carrier is a base set")
}

/// The cores `C1, .., Cn` of a monotonic `nu(s)`, which is then the union of
/// their up-sets.
pub fn mon_core_decomposition(model: &NeighbourhoodModel, s: usize) -> Result<Vec<StateSet>, ClassError> {
    if !is_monotonic_at(model, s) {
        return Err(ClassError::NotMonotonic(model.name(s).to_string()));
    }
    let cores: Vec<StateSet> = core_neighbourhoods(model, s).into_iter().collect();
    debug_assert!(model
        .neighbourhoods(s)
        .iter()
        .all(|u| cores.iter().any(|c| c.is_subset(*u))));
    Ok(cores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn k_ab() -> KripkeModel {
        let states = vec!["a".to_string(), "b".to_string()];
        KripkeModel::new(states, Relation::new(2, 2, [(0, 1)]).unwrap(), BTreeMap::new()).unwrap()
    }

    fn set(m: &NeighbourhoodModel, names: &[&str]) -> StateSet {
        m.set_of(names.iter().copied()).unwrap()
    }

    #[test]
    fn augmentation_examples() {
        let m = from_kripke(&k_ab());
        assert_eq!(
            m.neighbourhoods(0),
            &Collection::from([set(&m, &["b"]), set(&m, &["a", "b"])])
        );
        assert_eq!(m.neighbourhoods(1).len(), 4);
        assert!(is_monotonic(&m) && is_augmented(&m));
        assert_eq!(to_kripke(&m).unwrap(), k_ab());

        let empty_edges = KripkeModel::new(
            vec!["x".into(), "y".into()],
            Relation::empty(2, 2),
            BTreeMap::new(),
        )
        .unwrap();
        let m = from_kripke(&empty_edges);
        assert!((0..2).all(|s| m.neighbourhoods(s).len() == 4));
    }

    #[test]
    fn class_membership() {
        let t = fixtures::t();
        assert!(!is_monotonic(&t));
        assert!(!is_augmented(&t));
        assert!(is_monotonic(&fixtures::s()));
        assert!(!is_augmented(&fixtures::s()));
        assert_eq!(to_kripke(&t), Err(ClassError::NotAugmented("t1".into())));
    }

    #[test]
    fn cores() {
        let m = from_kripke(&k_ab());
        assert_eq!(core_neighbourhoods(&m, 0), Collection::from([set(&m, &["b"])]));
        assert!(core_neighbourhoods(&fixtures::s(), 0).is_empty());
        assert_eq!(
            core_neighbourhoods(&fixtures::t(), 2),
            Collection::from([StateSet::EMPTY])
        );
        assert_eq!(mon_core_decomposition(&m, 0).unwrap(), vec![set(&m, &["b"])]);

        let two_cores = NeighbourhoodModel::builder(["a", "b"])
            .neighbourhood("a", &["a"])
            .neighbourhood("a", &["b"])
            .neighbourhood("a", &["a", "b"])
            .build()
            .unwrap();
        assert_eq!(
            mon_core_decomposition(&two_cores, 0).unwrap(),
            vec![StateSet::singleton(0), StateSet::singleton(1)]
        );
        assert!(mon_core_decomposition(&fixtures::s(), 0).unwrap().is_empty());
        assert_eq!(
            mon_core_decomposition(&fixtures::t(), 0),
            Err(ClassError::NotMonotonic("t1".into()))
        );
    }

    #[test]
    fn base_sets() {
        let m = from_kripke(&k_ab());
        assert_eq!(minimal_base(&m, 0), set(&m, &["b"]));
        assert_eq!(minimal_base(&m, 1), StateSet::EMPTY);
        assert_eq!(minimal_base(&fixtures::s(), 0), StateSet::EMPTY);
        let t = fixtures::t();
        // {t2} is not a base: {t2, t3} has trace {t2} but is not a neighbourhood;
        // {t2, t3} is not either: {t1, t2} has trace {t2}
        assert!(!is_base(&t, 0, set(&t, &["t2"])));
        assert!(!is_base(&t, 0, set(&t, &["t2", "t3"])));
        assert_eq!(minimal_base(&t, 0), t.carrier());
    }

    #[test]
    fn base_check_matches_definition() {
        let t = fixtures::t();
        for s in 0..3 {
            for b in StateSet::all_subsets(3) {
                let expected = StateSet::all_subsets(3)
                    .all(|d| t.has_neighbourhood(s, d) == t.has_neighbourhood(s, d.intersection(b)));
                assert_eq!(is_base(&t, s, b), expected);
            }
        }
    }

    #[test]
    fn kripke_json_round_trip() {
        let text =
            r#"{"states": ["a","b"], "edges": [["a","b"]], "atoms": ["p0"], "valuation": {"p0": ["b"]}}"#;
        let k = KripkeModel::from_json(text).unwrap();
        assert_eq!(k.successors(0), StateSet::singleton(1));
        let back = KripkeModel::from_json(&k.to_json_value().to_string()).unwrap();
        assert_eq!(back, k);
        assert!(matches!(
            KripkeModel::from_json(r#"{"states": ["a"], "edges": [["a","z"]]}"#),
            Err(ModelError::UnknownState(_))
        ));
    }
}
