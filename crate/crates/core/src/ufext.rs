//! Ultrafilter extensions.
//!
//! Over a finite carrier every ultrafilter is principal, so `Uf(S)` is
//! enumerated as one `u_s` per state. The extension itself is computed from
//! the general definition: `mu(u) = { hat(U) | boxtimes(U) in u }` with
//! `hat(U) = { v | U in v }`, and `V^u(p) = { u | V(p) in u }`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{
    bounded_morphism_violation, Collection, MorphismViolation, NeighbourhoodModel, StateFunction, StateSet,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UfError {
    #[error("not a bounded morphism: {0:?}")]
    NotABoundedMorphism(MorphismViolation),
}

/// The principal ultrafilter `{ U | point in U }` over `{0, .., carrier-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ultrafilter {
    carrier: usize,
    point: usize,
}

impl Ultrafilter {
    pub fn principal(carrier: usize, point: usize) -> Self {
        assert!(point < carrier, "point outside the carrier");
        Ultrafilter { carrier, point }
    }

    pub fn point(&self) -> usize {
        self.point
    }

    pub fn contains(&self, set: StateSet) -> bool {
        set.contains(self.point)
    }

    /// Every member, as an explicit family.
    pub fn members(&self) -> Collection {
        StateSet::all_subsets(self.carrier)
            .filter(|u| self.contains(*u))
            .collect()
    }
}

/// The ultrafilter axioms for a family of subsets of `{0, .., n-1}`.
pub fn is_ultrafilter(n: usize, family: &Collection) -> bool {
    let full = StateSet::full(n);
    family.contains(&full)
        && family
            .iter()
            .all(|u| full.difference(*u).iter().all(|x| family.contains(&u.with(x))))
        && family
            .iter()
            .all(|u| family.iter().all(|v| family.contains(&u.intersection(*v))))
        && StateSet::all_subsets(n).all(|u| family.contains(&u) != family.contains(&u.complement(n)))
}

/// `Uf(S)` in carrier order.
pub fn ultrafilters(model: &NeighbourhoodModel) -> Vec<Ultrafilter> {
    (0..model.len())
        .map(|s| Ultrafilter::principal(model.len(), s))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UltrafilterExtension {
    pub model: NeighbourhoodModel,
    /// `s -> u_s`.
    pub principal: StateFunction,
    pub ultrafilters: Vec<Ultrafilter>,
}

pub fn state_name(name: &str) -> String {
    format!("uf:{name}")
}

pub fn ultrafilter_extension(model: &NeighbourhoodModel) -> UltrafilterExtension {
    let ufs = ultrafilters(model);
    let hat = |u: StateSet| -> StateSet {
        ufs.iter()
            .enumerate()
            .filter(|(_, v)| v.contains(u))
            .map(|(i, _)| i)
            .collect()
    };
    // boxtimes(U) is empty, hence in no ultrafilter, unless U is somebody's
    // neighbourhood
    let candidates: Collection = (0..model.len())
        .flat_map(|s| model.neighbourhoods(s).iter().copied())
        .collect();
    let boxes: Vec<(StateSet, StateSet)> = candidates.iter().map(|&u| (model.boxtimes(u), hat(u))).collect();
    let nbhd = ufs
        .iter()
        .map(|v| {
            boxes
                .iter()
                .filter(|(bx, _)| v.contains(*bx))
                .map(|&(_, h)| h)
                .collect()
        })
        .collect();
    let valuation: BTreeMap<u32, StateSet> = model
        .valuations()
        .iter()
        .map(|(&p, &set)| (p, hat(set)))
        .collect();
    let states = ufs.iter().map(|v| state_name(model.name(v.point()))).collect();
    let extension =
        NeighbourhoodModel::from_parts(states, nbhd, valuation).expect("extension is well formed");
    let principal = StateFunction::new(
        (0..model.len())
            .map(|s| ufs.iter().position(|v| v.point() == s).expect("u_s exists"))
            .collect(),
        ufs.len(),
    )
    .expect("principal map in range");
    UltrafilterExtension {
        model: extension,
        principal,
        ultrafilters: ufs,
    }
}

/// `f^u`, the restriction of `2^2(f)` to ultrafilters: `u` goes to the
/// ultrafilter `{ D | f^{-1}[D] in u }`.
pub fn lift_morphism(
    f: &StateFunction,
    source: &NeighbourhoodModel,
    target: &NeighbourhoodModel,
) -> Result<StateFunction, UfError> {
    let atoms = source
        .atom_support()
        .union(&target.atom_support())
        .copied()
        .collect();
    if let Some(v) = bounded_morphism_violation(f, source, target, &atoms) {
        return Err(UfError::NotABoundedMorphism(v));
    }
    let targets = ultrafilters(target);
    let map = ultrafilters(source)
        .iter()
        .map(|u| {
            let image: Collection = StateSet::all_subsets(target.len())
                .filter(|&d| u.contains(f.preimage(d)))
                .collect();
            targets
                .iter()
                .position(|v| v.members() == image)
                .expect("the image of an ultrafilter is an ultrafilter")
        })
        .collect();
    Ok(StateFunction::new(map, targets.len()).expect("in range"))
}
