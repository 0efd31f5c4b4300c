#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nbhd_core::model::Collection;
use nbhd_core::{Formula, NeighbourhoodModel, StateSet};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random model on `n` states named `{prefix}0, ..` over atoms `p0..p{atoms-1}`.
/// Some states copy an earlier state's collection so that non-trivial
/// equivalences are common.
pub fn random_model_of_size(rng: &mut ChaCha8Rng, n: usize, atoms: u32, prefix: &str) -> NeighbourhoodModel {
    let density: f64 = rng.gen_range(0.05..0.6);
    let subsets: Vec<StateSet> = StateSet::all_subsets(n).collect();
    let mut nbhd: Vec<Collection> = Vec::with_capacity(n);
    for s in 0..n {
        if s > 0 && rng.gen_bool(0.3) {
            let source = rng.gen_range(0..s);
            nbhd.push(nbhd[source].clone());
            continue;
        }
        nbhd.push(
            subsets
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(density))
                .collect(),
        );
    }
    let valuation: BTreeMap<u32, StateSet> = (0..atoms)
        .map(|p| (p, (0..n).filter(|_| rng.gen_bool(0.5)).collect()))
        .collect();
    let states = (0..n).map(|i| format!("{prefix}{i}")).collect();
    NeighbourhoodModel::from_parts(states, nbhd, valuation).unwrap()
}

pub fn random_model(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    max_atoms: u32,
    prefix: &str,
) -> NeighbourhoodModel {
    let n = rng.gen_range(1..=max_states);
    let atoms = rng.gen_range(0..=max_atoms);
    random_model_of_size(rng, n, atoms, prefix)
}

/// `model` with its states permuted and renamed, and each state possibly
/// duplicated, so that the copy is behaviourally close to the original.
pub fn shuffled_copy(
    rng: &mut ChaCha8Rng,
    model: &NeighbourhoodModel,
    max_states: usize,
    prefix: &str,
) -> NeighbourhoodModel {
    let n = model.len();
    let mut origin: Vec<usize> = (0..n).collect();
    while origin.len() < max_states && rng.gen_bool(0.5) {
        origin.push(rng.gen_range(0..n));
    }
    origin.shuffle(rng);
    let m = origin.len();
    // a set U of the copy stands for { s | some copy of s is in U }, which
    // keeps copy-of-s related to s when U is a union of copy classes
    let nbhd: Vec<Collection> = origin
        .iter()
        .map(|&s| {
            StateSet::all_subsets(m)
                .filter(|u| {
                    let back: StateSet = u.iter().map(|i| origin[i]).collect();
                    let saturated = (0..m).all(|i| u.contains(i) == back.contains(origin[i]));
                    if saturated {
                        model.has_neighbourhood(s, back)
                    } else {
                        rng.gen_bool(0.2)
                    }
                })
                .collect()
        })
        .collect();
    let valuation = model
        .valuations()
        .iter()
        .map(|(&p, &set)| (p, (0..m).filter(|&i| set.contains(origin[i])).collect()))
        .collect();
    let states = (0..m).map(|i| format!("{prefix}{i}")).collect();
    NeighbourhoodModel::from_parts(states, nbhd, valuation).unwrap()
}

/// A random pair for comparing states across models: independent, or the
/// second derived from the first.
pub fn random_pair(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    max_atoms: u32,
) -> (NeighbourhoodModel, NeighbourhoodModel) {
    let left = random_model(rng, max_states, max_atoms, "a");
    let right = if rng.gen_bool(0.5) {
        shuffled_copy(rng, &left, max_states, "b")
    } else {
        let n = rng.gen_range(1..=max_states);
        random_model_of_size(rng, n, left.atom_support().len() as u32, "b")
    };
    (left, right)
}

pub fn random_formula(rng: &mut ChaCha8Rng, atoms: u32, depth: usize) -> Formula {
    let leaf = |rng: &mut ChaCha8Rng| -> Formula {
        match rng.gen_range(0..6) {
            0 => Formula::Bottom,
            1 => Formula::top(),
            _ if atoms == 0 => Formula::Bottom,
            _ => Formula::atom(rng.gen_range(0..atoms)),
        }
    };
    if rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let choice = rng.gen_range(0..6);
    if depth == 0 && choice >= 4 {
        return leaf(rng);
    }
    match choice {
        0 => Formula::not(random_formula(rng, atoms, depth)),
        1 => Formula::and(
            random_formula(rng, atoms, depth),
            random_formula(rng, atoms, depth),
        ),
        2 => Formula::or(
            random_formula(rng, atoms, depth),
            random_formula(rng, atoms, depth),
        ),
        3 => leaf(rng),
        _ => Formula::boxed(random_formula(rng, atoms, depth - 1)),
    }
}

pub fn arb_formula(atoms: u32, depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Bottom),
        Just(Formula::top()),
        (0..atoms.max(1)).prop_map(Formula::atom),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            inner.prop_map(Formula::boxed),
        ]
    })
}

/// Models with `1..=max_states` states over `atoms` atoms.
pub fn arb_model(max_states: usize, atoms: u32) -> impl Strategy<Value = NeighbourhoodModel> {
    (1..=max_states).prop_flat_map(move |n| {
        let collection = prop::collection::btree_set(0u64..(1 << n), 0..=(1usize << n));
        let nbhd = prop::collection::vec(collection, n);
        let valuation = prop::collection::vec(0u64..(1 << n), atoms as usize);
        (nbhd, valuation).prop_map(move |(nbhd, valuation)| {
            let nbhd = nbhd
                .into_iter()
                .map(|c| c.into_iter().map(StateSet::from_bits).collect())
                .collect();
            let valuation = valuation
                .into_iter()
                .enumerate()
                .map(|(p, bits)| (p as u32, StateSet::from_bits(bits)))
                .collect();
            let states = (0..n).map(|i| format!("m{i}")).collect();
            NeighbourhoodModel::from_parts(states, nbhd, valuation).unwrap()
        })
    })
}

/// A random equivalence relation on `n` points, as a block number per point.
pub fn random_blocks(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let k = rng.gen_range(1..=n.max(1));
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// Classes of `M1 + M2` (left states first) under agreement on every
/// formula of modal depth at most `depth` over `atoms`, computed from the
/// definable subsets: depth-0 sets are Boolean combinations of atoms, and
/// depth-`d+1` sets add `{ s | X in nu(s) }` for every depth-`d` set `X`.
pub fn depth_classes(
    left: &NeighbourhoodModel,
    right: &NeighbourhoodModel,
    atoms: &BTreeSet<u32>,
    depth: usize,
) -> Vec<usize> {
    let n1 = left.len();
    let n = n1 + right.len();
    let split = |mask: u64| -> (StateSet, StateSet) {
        (
            StateSet::from_bits(mask & ((1 << n1) - 1)),
            StateSet::from_bits(mask >> n1),
        )
    };
    let join = |a: StateSet, b: StateSet| -> u64 { a.bits() | (b.bits() << n1) };
    let mut generators: Vec<u64> = atoms
        .iter()
        .map(|&p| join(left.valuation(p), right.valuation(p)))
        .collect();
    let classes = |generators: &[u64]| -> Vec<usize> {
        let signature = |x: usize| -> Vec<bool> { generators.iter().map(|g| g >> x & 1 == 1).collect() };
        let mut seen: Vec<Vec<bool>> = Vec::new();
        (0..n)
            .map(|x| {
                let sig = signature(x);
                match seen.iter().position(|s| *s == sig) {
                    Some(i) => i,
                    None => {
                        seen.push(sig);
                        seen.len() - 1
                    }
                }
            })
            .collect()
    };
    for _ in 0..depth {
        let current = classes(&generators);
        let k = current.iter().max().map_or(0, |m| m + 1);
        let mut boxes = Vec::new();
        for chosen in 0u64..1 << k {
            let set: u64 = (0..n)
                .filter(|&x| chosen >> current[x] & 1 == 1)
                .fold(0, |acc, x| acc | 1 << x);
            let (u1, u2) = split(set);
            let l: StateSet = (0..n1).filter(|&s| left.has_neighbourhood(s, u1)).collect();
            let r: StateSet = (0..right.len())
                .filter(|&s| right.has_neighbourhood(s, u2))
                .collect();
            boxes.push(join(l, r));
        }
        generators.extend(boxes);
    }
    classes(&generators)
}

/// Satisfiability by brute force over sets of types: `None` above five
/// generators. With at most four generators every set of types is tried;
/// with five, sets of up to `max(1, #boxes)` types, enough because a
/// coherent set keeps coherent after dropping all but one separating type
/// per pair of box arguments with different extensions.
pub fn naive_satisfiable(phi: &Formula) -> Option<bool> {
    fn collect(f: &Formula, out: &mut Vec<Formula>) {
        match f {
            Formula::Bottom => {}
            Formula::Atom(_) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
            Formula::Box(a) => {
                collect(a, out);
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
            Formula::Not(a) => collect(a, out),
            Formula::And(a, b) => {
                collect(a, out);
                collect(b, out);
            }
        }
    }
    fn holds(f: &Formula, generators: &[Formula], v: usize) -> bool {
        match f {
            Formula::Bottom => false,
            Formula::Atom(_) | Formula::Box(_) => {
                let i = generators.iter().position(|g| g == f).unwrap();
                v >> i & 1 == 1
            }
            Formula::Not(a) => !holds(a, generators, v),
            Formula::And(a, b) => holds(a, generators, v) && holds(b, generators, v),
        }
    }
    let mut generators = Vec::new();
    collect(phi, &mut generators);
    let g = generators.len();
    if g > 5 {
        return None;
    }
    let types = 1usize << g;
    let value = |f: &Formula| -> u32 {
        (0..types)
            .filter(|&v| holds(f, &generators, v))
            .fold(0, |acc, v| acc | 1 << v)
    };
    let goal = value(phi);
    let boxes: Vec<(u32, u32)> = generators
        .iter()
        .filter_map(|f| match f {
            Formula::Box(a) => Some((value(a), value(f))),
            _ => None,
        })
        .collect();
    let coherent = |w: u32| -> bool {
        (0..boxes.len()).all(|i| {
            (i + 1..boxes.len())
                .all(|j| w & boxes[i].0 != w & boxes[j].0 || w & (boxes[i].1 ^ boxes[j].1) == 0)
        })
    };
    if g <= 4 {
        return Some((1u32..1 << types).any(|w| w & goal != 0 && coherent(w)));
    }
    let limit = boxes.len().max(1);
    fn search(start: usize, types: usize, left: usize, w: u32, test: &dyn Fn(u32) -> bool) -> bool {
        if w != 0 && test(w) {
            return true;
        }
        if left == 0 {
            return false;
        }
        (start..types).any(|v| search(v + 1, types, left - 1, w | 1 << v, test))
    }
    let test = |w: u32| w & goal != 0 && coherent(w);
    Some(search(0, types, limit, 0, &test))
}

pub fn parse(text: &str) -> Formula {
    nbhd_core::parse(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Hand-picked theorems of the minimal logic of all neighbourhood models.
pub const TAUTOLOGIES: &[&str] = &[
    "p0 | ~p0",
    "p0 -> p0",
    "~(p0 & ~p0)",
    "(p0 -> p1) -> (~p1 -> ~p0)",
    "((p0 -> p1) & (p1 -> p2)) -> (p0 -> p2)",
    "(p0 & p1) <-> (p1 & p0)",
    "~~p0 <-> p0",
    "~(p0 | p1) <-> (~p0 & ~p1)",
    "[]p0 | ~[]p0",
    "[]p0 -> []p0",
    "([]p0 & []p1) -> []p0",
    "[](p0 & p1) <-> [](p1 & p0)",
    "[](p0 | p1) <-> [](p1 | p0)",
    "[]~~p0 <-> []p0",
    "[](p0 -> p1) <-> [](~p0 | p1)",
    "[](p0 | ~p0) <-> [](p1 -> p1)",
    "[]false <-> [](p0 & ~p0)",
    "<>p0 <-> ~[]~p0",
    "[][]p0 <-> [][]~~p0",
    "[](p0 & (p1 | p2)) <-> []((p0 & p1) | (p0 & p2))",
    "[]~(p0 | p1) <-> [](~p0 & ~p1)",
    "([]p0 -> []p1) | ([]p1 -> []p0)",
    "[]([]p0 & p1) <-> [](p1 & []~~p0)",
    "true",
    "(p2 -> []p0) | (p2 & ~[]p0) | ~p2",
];

/// Valid implications with expected interpolants where the least one is
/// known.
pub const INTERPOLATION_CASES: &[(&str, &str, Option<&str>)] = &[
    ("[]p0 & p1", "[]p0 | p2", Some("[](p0)")),
    ("false", "p3", Some("false")),
    ("p3", "true", Some("~(false)")),
    ("p0 & p1", "p1 | p2", Some("p1")),
    ("[](p0 & p1) & p2", "[](p1 & p0) | p3", None),
    ("p0 & (p0 -> p1)", "p1 | p2", Some("p1")),
    ("[]p1 & ~[]p0 & p2", "~[]p0 | p3", Some("~([](p0))")),
    ("[][]p0 & p1", "[][]~~p0", Some("[]([](p0))")),
    ("p0 & ~p0", "[]p1", Some("false")),
    ("[]p0 & p2", "p3 -> []p0", Some("[](p0)")),
    ("p0 & p1 & p2", "p0 | p3", Some("p0")),
    ("[](p0 | p1) & p2", "[](p1 | p0) | ~p2", None),
];
