//! Satisfiability, validity and local consequence over all neighbourhood
//! models, and bounded interpolant search.
//!
//! A type assigns a truth value to every generator of the closure of the
//! goal (atoms and boxed subformulas); Boolean subformulas follow. A set `W`
//! of types is coherent when `ext_W(psi) = ext_W(chi)` forces every member
//! to give `[]psi` and `[]chi` the same value. Coherent sets are exactly the
//! realisable type sets, with model `nu(v) = { ext_W(psi) | v([]psi) = 1 }`.
//!
//! Unions of coherent sets are coherent, so the engine computes the largest
//! coherent set by eliminating violating types, and the goal is satisfiable
//! iff some surviving type makes it true. The certificate is a small
//! coherent subset containing that type, turned into a model and checked.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{Collection, NeighbourhoodModel, StateSet};
use crate::syntax::{closure, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest number of generators (atoms plus boxed subformulas).
    pub max_generators: usize,
    /// Largest certificate model.
    pub max_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_generators: 16,
            max_states: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecisionError {
    #[error("closure has {generators} generators, above the cap of {cap}")]
    ClosureTooLarge { generators: usize, cap: usize },
    #[error("certificate needs {states} states, above the cap of {cap}")]
    CertificateTooLarge { states: usize, cap: usize },
    #[error("the implication is not valid")]
    NotValid,
    #[error("no interpolant of size at most {max_size}")]
    NotFoundWithinBound { max_size: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionResult {
    Sat {
        model: NeighbourhoodModel,
        witness: usize,
    },
    Unsat,
    Valid,
    Invalid {
        model: NeighbourhoodModel,
        witness: usize,
    },
}

impl DecisionResult {
    pub fn verdict(&self) -> &'static str {
        match self {
            DecisionResult::Sat { .. } => "SAT",
            DecisionResult::Unsat => "UNSAT",
            DecisionResult::Valid => "VALID",
            DecisionResult::Invalid { .. } => "INVALID",
        }
    }

    /// The certificate model and state, for `Sat` and `Invalid`.
    pub fn certificate(&self) -> Option<(&NeighbourhoodModel, usize)> {
        match self {
            DecisionResult::Sat { model, witness } | DecisionResult::Invalid { model, witness } => {
                Some((model, *witness))
            }
            _ => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, DecisionResult::Valid)
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, DecisionResult::Sat { .. })
    }
}

/// A set of types over `g` generators, as a bit-vector of length `2^g`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TypeSet {
    words: Vec<u64>,
}

impl TypeSet {
    fn word_count(g: usize) -> usize {
        (1usize << g).div_ceil(64)
    }

    fn last_mask(g: usize) -> u64 {
        let bits = 1usize << g;
        if bits.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (bits % 64)) - 1
        }
    }

    fn empty(g: usize) -> Self {
        TypeSet {
            words: vec![0; Self::word_count(g)],
        }
    }

    fn full(g: usize) -> Self {
        let mut words = vec![u64::MAX; Self::word_count(g)];
        *words.last_mut().expect("at least one word") = Self::last_mask(g);
        TypeSet { words }
    }

    fn generator(g: usize, bit: usize) -> Self {
        let mut set = Self::empty(g);
        for v in 0..1usize << g {
            if v >> bit & 1 == 1 {
                set.insert(v);
            }
        }
        set
    }

    fn insert(&mut self, v: usize) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    fn contains(&self, v: usize) -> bool {
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    fn complement(&self, g: usize) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        *words.last_mut().expect("at least one word") &= Self::last_mask(g);
        TypeSet { words }
    }

    fn and(&self, other: &TypeSet) -> Self {
        TypeSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn and_not(&self, other: &TypeSet) -> Self {
        TypeSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    fn xor(&self, other: &TypeSet) -> Self {
        TypeSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        }
    }

    fn highest(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
    }
}

/// Truth values of every closure formula on every type.
struct Engine {
    g: usize,
    subformulas: Vec<Formula>,
    index: HashMap<Formula, usize>,
    values: Vec<TypeSet>,
    atoms: Vec<(u32, usize)>,
    /// (argument subformula, generator bit of the box).
    boxes: Vec<(usize, usize)>,
}

impl Engine {
    fn new(phi: &Formula, limits: &Limits) -> Result<Self, DecisionError> {
        let cl = closure(phi);
        let generators: Vec<&Formula> = cl
            .subformulas
            .iter()
            .filter(|f| matches!(f, Formula::Atom(_) | Formula::Box(_)))
            .collect();
        let g = generators.len();
        if g > limits.max_generators {
            return Err(DecisionError::ClosureTooLarge {
                generators: g,
                cap: limits.max_generators,
            });
        }
        let bit_of: HashMap<&Formula, usize> = generators.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let index: HashMap<Formula, usize> = cl
            .subformulas
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i))
            .collect();
        let mut values: Vec<TypeSet> = Vec::with_capacity(cl.subformulas.len());
        let mut atoms = Vec::new();
        let mut boxes = Vec::new();
        for f in &cl.subformulas {
            let value = match f {
                Formula::Bottom => TypeSet::empty(g),
                Formula::Atom(p) => {
                    atoms.push((*p, bit_of[f]));
                    TypeSet::generator(g, bit_of[f])
                }
                Formula::Box(arg) => {
                    boxes.push((index[&**arg], bit_of[f]));
                    TypeSet::generator(g, bit_of[f])
                }
                Formula::Not(a) => values[index[&**a]].complement(g),
                Formula::And(a, b) => values[index[&**a]].and(&values[index[&**b]]),
            };
            values.push(value);
        }
        Ok(Engine {
            g,
            subformulas: cl.subformulas,
            index,
            values,
            atoms,
            boxes,
        })
    }

    /// The largest coherent set of types.
    fn largest_coherent(&self) -> TypeSet {
        let mut w = TypeSet::full(self.g);
        loop {
            let exts: Vec<TypeSet> = self
                .boxes
                .iter()
                .map(|&(arg, _)| self.values[arg].and(&w))
                .collect();
            let mut bad = TypeSet::empty(self.g);
            for i in 0..self.boxes.len() {
                for j in i + 1..self.boxes.len() {
                    if exts[i] == exts[j] {
                        let differ = self.values_of_bit(i).xor(&self.values_of_bit(j));
                        bad = TypeSet {
                            words: bad.words.iter().zip(&differ.words).map(|(a, b)| a | b).collect(),
                        };
                    }
                }
            }
            let next = w.and_not(&bad);
            if next == w {
                return w;
            }
            w = next;
        }
    }

    fn values_of_bit(&self, k: usize) -> TypeSet {
        TypeSet::generator(self.g, self.boxes[k].1)
    }

    fn holds(&self, v: usize, formula: usize) -> bool {
        self.values[formula].contains(v)
    }

    fn is_coherent(&self, w: &[usize]) -> bool {
        let ext = |arg: usize| -> u128 {
            w.iter()
                .enumerate()
                .filter(|(_, &v)| self.holds(v, arg))
                .fold(0, |acc, (i, _)| acc | 1 << i)
        };
        let exts: Vec<u128> = self.boxes.iter().map(|&(arg, _)| ext(arg)).collect();
        (0..self.boxes.len()).all(|i| {
            (i + 1..self.boxes.len()).all(|j| {
                exts[i] != exts[j]
                    || w.iter()
                        .all(|&v| (v >> self.boxes[i].1 & 1) == (v >> self.boxes[j].1 & 1))
            })
        })
    }

    /// A small coherent subset of `coherent` containing `v0`: every two box
    /// arguments with different extensions over `coherent` get a separating
    /// type, so no new coincidence constraints arise.
    fn certificate(&self, coherent: &TypeSet, v0: usize) -> Vec<usize> {
        let mut classes: Vec<TypeSet> = Vec::new();
        for &(arg, _) in &self.boxes {
            let ext = self.values[arg].and(coherent);
            if !classes.contains(&ext) {
                classes.push(ext);
            }
        }
        let mut chosen = vec![v0];
        loop {
            let signature = |c: &TypeSet| -> Vec<bool> { chosen.iter().map(|&v| c.contains(v)).collect() };
            let clash = (0..classes.len()).find_map(|i| {
                (i + 1..classes.len())
                    .find(|&j| signature(&classes[i]) == signature(&classes[j]))
                    .map(|j| (i, j))
            });
            match clash {
                None => break,
                Some((i, j)) => {
                    let w = classes[i]
                        .xor(&classes[j])
                        .highest()
                        .expect("distinct extensions differ somewhere");
                    chosen.push(w);
                }
            }
        }
        let mut k = chosen.len();
        while k > 1 {
            k -= 1;
            let mut fewer = chosen.clone();
            fewer.remove(k);
            if self.is_coherent(&fewer) {
                chosen = fewer;
            }
        }
        chosen
    }

    fn model(&self, w: &[usize]) -> NeighbourhoodModel {
        let ext = |arg: usize| -> StateSet {
            w.iter()
                .enumerate()
                .filter(|(_, &v)| self.holds(v, arg))
                .map(|(i, _)| i)
                .collect()
        };
        let nbhd: Vec<Collection> = w
            .iter()
            .map(|&v| {
                self.boxes
                    .iter()
                    .filter(|&&(_, bit)| v >> bit & 1 == 1)
                    .map(|&(arg, _)| ext(arg))
                    .collect()
            })
            .collect();
        let valuation: BTreeMap<u32, StateSet> = self
            .atoms
            .iter()
            .map(|&(p, bit)| {
                let set = w
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v >> bit & 1 == 1)
                    .map(|(i, _)| i)
                    .collect();
                (p, set)
            })
            .collect();
        let states = (0..w.len()).map(|i| format!("w{i}")).collect();
        let model =
            NeighbourhoodModel::from_parts(states, nbhd, valuation).expect("certificate is well formed");
        for (k, f) in self.subformulas.iter().enumerate() {
            assert_eq!(
                model.truth_set(f),
                ext(k),
                "certificate model disagrees with its types on {f}"
            );
        }
        model
    }
}

pub fn satisfiable(phi: &Formula) -> Result<DecisionResult, DecisionError> {
    satisfiable_with(phi, &Limits::default())
}

/// `Sat` with a checked model whose state `witness` satisfies `phi`, or
/// `Unsat`.
pub fn satisfiable_with(phi: &Formula, limits: &Limits) -> Result<DecisionResult, DecisionError> {
    let engine = Engine::new(phi, limits)?;
    let coherent = engine.largest_coherent();
    let goal = engine.index[phi];
    let Some(v0) = engine.values[goal].and(&coherent).highest() else {
        return Ok(DecisionResult::Unsat);
    };
    let w = engine.certificate(&coherent, v0);
    if w.len() > limits.max_states {
        return Err(DecisionError::CertificateTooLarge {
            states: w.len(),
            cap: limits.max_states,
        });
    }
    let model = engine.model(&w);
    assert!(
        model.truth_set(phi).contains(0),
        "certificate does not satisfy the goal"
    );
    Ok(DecisionResult::Sat { model, witness: 0 })
}

pub fn valid(phi: &Formula) -> Result<DecisionResult, DecisionError> {
    valid_with(phi, &Limits::default())
}

/// `Valid`, or `Invalid` with a countermodel refuting `phi` at `witness`.
pub fn valid_with(phi: &Formula, limits: &Limits) -> Result<DecisionResult, DecisionError> {
    let refutation = match phi {
        Formula::Not(inner) => (**inner).clone(),
        _ => Formula::not(phi.clone()),
    };
    Ok(match satisfiable_with(&refutation, limits)? {
        DecisionResult::Sat { model, witness } => DecisionResult::Invalid { model, witness },
        _ => DecisionResult::Valid,
    })
}

/// Local consequence: `premises |= phi` iff `/\premises -> phi` is valid.
pub fn consequence(premises: &[Formula], phi: &Formula) -> Result<DecisionResult, DecisionError> {
    consequence_with(premises, phi, &Limits::default())
}

pub fn consequence_with(
    premises: &[Formula],
    phi: &Formula,
    limits: &Limits,
) -> Result<DecisionResult, DecisionError> {
    let conjunction = Formula::conjunction(premises.iter().cloned());
    valid_with(&Formula::implies(conjunction, phi.clone()), limits)
}

pub const DEFAULT_INTERPOLANT_SIZE: usize = 9;

/// Propositional variables at the top level: atoms and boxes not under a box.
fn top_level_variables(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::Bottom => {}
        Formula::Atom(_) | Formula::Box(_) => out.push(f.clone()),
        Formula::Not(a) => top_level_variables(a, out),
        Formula::And(a, b) => {
            top_level_variables(a, out);
            top_level_variables(b, out);
        }
    }
}

fn propositional_value(f: &Formula, vars: &[Formula], assignment: usize) -> bool {
    match f {
        Formula::Bottom => false,
        Formula::Atom(_) | Formula::Box(_) => {
            let i = vars.binary_search(f).expect("variable was collected");
            assignment >> i & 1 == 1
        }
        Formula::Not(a) => !propositional_value(a, vars, assignment),
        Formula::And(a, b) => {
            propositional_value(a, vars, assignment) && propositional_value(b, vars, assignment)
        }
    }
}

/// Candidates with the same variables and truth table are the same up to
/// propositional reasoning.
fn propositional_key(f: &Formula) -> (Vec<Formula>, Vec<bool>) {
    let mut vars = Vec::new();
    top_level_variables(f, &mut vars);
    vars.sort();
    vars.dedup();
    let table = (0..1usize << vars.len())
        .map(|a| propositional_value(f, &vars, a))
        .collect();
    (vars, table)
}

/// Negation-normal-form candidates by size, each size in the order
/// constants, atoms, negated atoms, boxes, negated boxes, conjunctions,
/// disjunctions. A box counts one, a negation one, a binary connective one.
struct Candidates {
    atoms: Vec<u32>,
    layers: Vec<Vec<Formula>>,
    seen: HashSet<(Vec<Formula>, Vec<bool>)>,
}

impl Candidates {
    fn new(atoms: Vec<u32>) -> Self {
        Candidates {
            atoms,
            layers: vec![Vec::new()],
            seen: HashSet::new(),
        }
    }

    fn next_layer(&mut self) -> &[Formula] {
        let size = self.layers.len();
        let mut raw = Vec::new();
        if size == 1 {
            raw.push(Formula::Bottom);
            raw.push(Formula::top());
            raw.extend(self.atoms.iter().map(|&p| Formula::atom(p)));
        }
        if size == 2 {
            raw.extend(self.atoms.iter().map(|&p| Formula::not(Formula::atom(p))));
        }
        if size >= 2 {
            raw.extend(self.layers[size - 1].iter().map(|d| Formula::boxed(d.clone())));
        }
        if size >= 3 {
            raw.extend(
                self.layers[size - 2]
                    .iter()
                    .map(|d| Formula::not(Formula::boxed(d.clone()))),
            );
        }
        for disjunction in [false, true] {
            for left in 1..size {
                let right = size - 1 - left;
                if right < left {
                    break;
                }
                for (i, a) in self.layers[left].iter().enumerate() {
                    let start = if left == right { i } else { 0 };
                    for b in &self.layers[right][start..] {
                        raw.push(if disjunction {
                            Formula::or(a.clone(), b.clone())
                        } else {
                            Formula::and(a.clone(), b.clone())
                        });
                    }
                }
            }
        }
        let mut layer = Vec::new();
        for f in raw {
            if self.seen.insert(propositional_key(&f)) {
                layer.push(f);
            }
        }
        self.layers.push(layer);
        self.layers.last().expect("just pushed")
    }
}

pub fn interpolant(left: &Formula, right: &Formula, max_size: usize) -> Result<Formula, DecisionError> {
    interpolant_with(left, right, max_size, &Limits::default())
}

/// The first candidate over the shared atoms, in order of size, with
/// `left -> chi` and `chi -> right` both valid.
pub fn interpolant_with(
    left: &Formula,
    right: &Formula,
    max_size: usize,
    limits: &Limits,
) -> Result<Formula, DecisionError> {
    if !valid_with(&Formula::implies(left.clone(), right.clone()), limits)?.is_valid() {
        return Err(DecisionError::NotValid);
    }
    let shared: Vec<u32> = left.atoms().intersection(&right.atoms()).copied().collect();
    let mut candidates = Candidates::new(shared);
    for _ in 1..=max_size {
        let layer = candidates.next_layer();
        let found = layer
            .par_iter()
            .map(|chi| -> Result<bool, DecisionError> {
                Ok(
                    valid_with(&Formula::implies(left.clone(), chi.clone()), limits)?.is_valid()
                        && valid_with(&Formula::implies(chi.clone(), right.clone()), limits)?.is_valid(),
                )
            })
            .enumerate()
            .find_first(|(_, r)| !matches!(r, Ok(false)));
        if let Some((i, r)) = found {
            r?;
            return Ok(layer[i].clone());
        }
    }
    Err(DecisionError::NotFoundWithinBound { max_size })
}
