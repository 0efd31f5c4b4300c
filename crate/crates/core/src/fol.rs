//! Two-sorted first-order structures, the standard translation, evaluation,
//! and the two neighbourhood axioms.
//!
//! Sort `s` ranges over states and sort `n` over neighbourhoods. The
//! signature has a unary `P_i` per atom, `x N u` (neighbourhood of) and
//! `u E x` (element of).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::model::{Collection, ModelError, NeighbourhoodModel, StateSet};
use crate::syntax::Formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    State,
    Nbhd,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FolFormula {
    StateEq(String, String),
    NbhdEq(String, String),
    /// `P_i x`.
    Pred(u32, String),
    /// `x N u`.
    N(String, String),
    /// `u E x`.
    E(String, String),
    Not(Box<FolFormula>),
    And(Box<FolFormula>, Box<FolFormula>),
    Iff(Box<FolFormula>, Box<FolFormula>),
    Exists(Sort, String, Box<FolFormula>),
    Forall(Sort, String, Box<FolFormula>),
}

impl FolFormula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: FolFormula) -> Self {
        FolFormula::Not(Box::new(f))
    }

    pub fn and(a: FolFormula, b: FolFormula) -> Self {
        FolFormula::And(Box::new(a), Box::new(b))
    }

    pub fn iff(a: FolFormula, b: FolFormula) -> Self {
        FolFormula::Iff(Box::new(a), Box::new(b))
    }

    /// `a -> b` as `~(a & ~b)`.
    pub fn implies(a: FolFormula, b: FolFormula) -> Self {
        FolFormula::not(FolFormula::and(a, FolFormula::not(b)))
    }

    pub fn exists(sort: Sort, var: &str, body: FolFormula) -> Self {
        FolFormula::Exists(sort, var.to_string(), Box::new(body))
    }

    pub fn forall(sort: Sort, var: &str, body: FolFormula) -> Self {
        FolFormula::Forall(sort, var.to_string(), Box::new(body))
    }

    fn is_binary(&self) -> bool {
        matches!(self, FolFormula::And(..) | FolFormula::Iff(..))
    }

    fn render_into(&self, out: &mut String) {
        let wrapped = |f: &FolFormula, out: &mut String| {
            if f.is_binary() {
                f.render_into(out);
            } else {
                out.push('(');
                f.render_into(out);
                out.push(')');
            }
        };
        match self {
            FolFormula::StateEq(a, b) | FolFormula::NbhdEq(a, b) => out.push_str(&format!("{a} = {b}")),
            FolFormula::Pred(i, x) => out.push_str(&format!("P{i} {x}")),
            FolFormula::N(x, u) => out.push_str(&format!("{x} N {u}")),
            FolFormula::E(u, x) => out.push_str(&format!("{u} E {x}")),
            FolFormula::Not(f) => {
                out.push('~');
                wrapped(f, out);
            }
            FolFormula::And(a, b) | FolFormula::Iff(a, b) => {
                let op = if matches!(self, FolFormula::And(..)) {
                    " & "
                } else {
                    " <-> "
                };
                out.push('(');
                a.render_into(out);
                out.push_str(op);
                b.render_into(out);
                out.push(')');
            }
            FolFormula::Exists(_, v, body) => {
                out.push_str(&format!("Ex {v} "));
                wrapped(body, out);
            }
            FolFormula::Forall(_, v, body) => {
                out.push_str(&format!("A{v} "));
                wrapped(body, out);
            }
        }
    }

    /// Variables occurring free, with the sort of their occurrence.
    pub fn free_variables(&self) -> BTreeSet<(String, Sort)> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<(String, Sort)>, out: &mut BTreeSet<(String, Sort)>) {
        let mut note = |v: &String, s: Sort, bound: &Vec<(String, Sort)>| {
            if !bound.iter().any(|(b, bs)| b == v && *bs == s) {
                out.insert((v.clone(), s));
            }
        };
        match self {
            FolFormula::StateEq(a, b) => {
                note(a, Sort::State, bound);
                note(b, Sort::State, bound);
            }
            FolFormula::NbhdEq(a, b) => {
                note(a, Sort::Nbhd, bound);
                note(b, Sort::Nbhd, bound);
            }
            FolFormula::Pred(_, x) => note(x, Sort::State, bound),
            FolFormula::N(x, u) => {
                note(x, Sort::State, bound);
                note(u, Sort::Nbhd, bound);
            }
            FolFormula::E(u, x) => {
                note(u, Sort::Nbhd, bound);
                note(x, Sort::State, bound);
            }
            FolFormula::Not(f) => f.collect_free(bound, out),
            FolFormula::And(a, b) | FolFormula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            FolFormula::Exists(s, v, body) | FolFormula::Forall(s, v, body) => {
                bound.push((v.clone(), *s));
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name with the sorts it is used at.
    fn variable_sorts(&self, out: &mut BTreeMap<String, BTreeSet<Sort>>) {
        let mut note = |v: &String, s: Sort| {
            out.entry(v.clone()).or_default().insert(s);
        };
        match self {
            FolFormula::StateEq(a, b) => {
                note(a, Sort::State);
                note(b, Sort::State);
            }
            FolFormula::NbhdEq(a, b) => {
                note(a, Sort::Nbhd);
                note(b, Sort::Nbhd);
            }
            FolFormula::Pred(_, x) => note(x, Sort::State),
            FolFormula::N(x, u) => {
                note(x, Sort::State);
                note(u, Sort::Nbhd);
            }
            FolFormula::E(u, x) => {
                note(u, Sort::Nbhd);
                note(x, Sort::State);
            }
            FolFormula::Not(f) => f.variable_sorts(out),
            FolFormula::And(a, b) | FolFormula::Iff(a, b) => {
                a.variable_sorts(out);
                b.variable_sorts(out);
            }
            FolFormula::Exists(s, v, body) | FolFormula::Forall(s, v, body) => {
                note(v, *s);
                body.variable_sorts(out);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_variables().is_empty()
    }
}

impl fmt::Display for FolFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.render_into(&mut out);
        f.write_str(&out)
    }
}

/// `st_x(phi)`. Box number `k` in pre-order binds `u`/`y` (`k = 0`) or
/// `u{k}`/`y{k}`, skipping names equal to `x`.
pub fn st(phi: &Formula, x: &str) -> FolFormula {
    let mut counter = 0;
    translate(phi, x, x, &mut counter)
}

fn fresh(base: &str, k: usize, avoid: &str) -> String {
    let mut name = if k == 0 {
        base.to_string()
    } else {
        format!("{base}{k}")
    };
    while name == avoid {
        name.push('_');
    }
    name
}

fn translate(phi: &Formula, x: &str, root: &str, counter: &mut usize) -> FolFormula {
    match phi {
        Formula::Bottom => FolFormula::not(FolFormula::StateEq(x.to_string(), x.to_string())),
        Formula::Atom(i) => FolFormula::Pred(*i, x.to_string()),
        Formula::Not(f) => FolFormula::not(translate(f, x, root, counter)),
        Formula::And(a, b) => {
            let a = translate(a, x, root, counter);
            FolFormula::and(a, translate(b, x, root, counter))
        }
        Formula::Box(f) => {
            let k = *counter;
            *counter += 1;
            let (u, y) = (fresh("u", k, root), fresh("y", k, root));
            let inner = translate(f, &y, root, counter);
            FolFormula::exists(
                Sort::Nbhd,
                &u,
                FolFormula::and(
                    FolFormula::N(x.to_string(), u.clone()),
                    FolFormula::forall(
                        Sort::State,
                        &y,
                        FolFormula::iff(FolFormula::E(u.clone(), y.clone()), inner),
                    ),
                ),
            )
        }
    }
}

/// A finite two-sorted structure `(Ds, Dn, {P_i}, N, E)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoSortedStructure {
    pub states: Vec<String>,
    pub nbhds: Vec<String>,
    pub preds: BTreeMap<u32, StateSet>,
    /// `(state, nbhd)` pairs.
    pub n: BTreeSet<(usize, usize)>,
    /// `(nbhd, state)` pairs.
    pub e: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FolError {
    #[error("variable {0:?} is used at both sorts")]
    UnsortedVariable(String),
    #[error("free variable {0:?} is not assigned")]
    UnassignedVariable(String),
    #[error("assignment of {0:?} is outside its domain")]
    AssignmentOutOfRange(String),
    #[error("structure violates the neighbourhood axioms: {0:?}")]
    NaxViolation(NaxViolation),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Names an element of `Dn` by its members.
pub fn set_name(model: &NeighbourhoodModel, set: StateSet) -> String {
    format!("{{{}}}", model.names_of(set).join(","))
}

/// The structure of a model: `Dn` is the set of distinct neighbourhoods of
/// any state, in bit-vector order.
pub fn fotrans(model: &NeighbourhoodModel) -> TwoSortedStructure {
    let dn: Vec<StateSet> = (0..model.len())
        .flat_map(|s| model.neighbourhoods(s).iter().copied())
        .collect::<Collection>()
        .into_iter()
        .collect();
    let index: HashMap<StateSet, usize> = dn.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let n = (0..model.len())
        .flat_map(|s| model.neighbourhoods(s).iter().map(move |u| (s, u)))
        .map(|(s, u)| (s, index[u]))
        .collect();
    let e = dn
        .iter()
        .enumerate()
        .flat_map(|(i, u)| u.iter().map(move |s| (i, s)))
        .collect();
    TwoSortedStructure {
        states: model.states().to_vec(),
        nbhds: dn.iter().map(|&u| set_name(model, u)).collect(),
        preds: model.valuations().clone(),
        n,
        e,
    }
}

/// Values for free variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub states: HashMap<String, usize>,
    pub nbhds: HashMap<String, usize>,
}

impl Assignment {
    pub fn state(var: &str, value: usize) -> Self {
        let mut a = Assignment::default();
        a.states.insert(var.to_string(), value);
        a
    }
}

impl TwoSortedStructure {
    pub fn eval(&self, phi: &FolFormula, assignment: &Assignment) -> Result<bool, FolError> {
        fol_eval(self, phi, assignment)
    }

    /// `eta(u) = { x | u E x }`.
    pub fn extension(&self, u: usize) -> StateSet {
        self.e.range((u, 0)..(u + 1, 0)).map(|&(_, x)| x).collect()
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "states": self.states,
            "neighbourhoods": self.nbhds,
            "predicates": self.preds.iter().map(|(p, set)| {
                (format!("P{p}"), set.iter().map(|s| self.states[s].clone()).collect::<Vec<_>>())
            }).collect::<BTreeMap<_, _>>(),
            "N": self.n.iter().map(|&(s, u)| [&self.states[s], &self.nbhds[u]]).collect::<Vec<_>>(),
            "E": self.e.iter().map(|&(u, s)| [&self.nbhds[u], &self.states[s]]).collect::<Vec<_>>(),
        })
    }
}

struct Env<'a> {
    states: Vec<(&'a str, usize)>,
    nbhds: Vec<(&'a str, usize)>,
}

impl<'a> Env<'a> {
    fn get(&self, sort: Sort, var: &str) -> usize {
        let stack = if sort == Sort::State {
            &self.states
        } else {
            &self.nbhds
        };
        stack
            .iter()
            .rev()
            .find(|(v, _)| *v == var)
            .map(|&(_, val)| val)
            .expect("free variables are checked before evaluation")
    }
}

/// Tarskian evaluation over the finite structure.
pub fn fol_eval(
    structure: &TwoSortedStructure,
    phi: &FolFormula,
    assignment: &Assignment,
) -> Result<bool, FolError> {
    let mut sorts = BTreeMap::new();
    phi.variable_sorts(&mut sorts);
    if let Some((name, _)) = sorts.iter().find(|(_, s)| s.len() > 1) {
        return Err(FolError::UnsortedVariable(name.clone()));
    }
    for (name, sort) in phi.free_variables() {
        let (map, bound) = match sort {
            Sort::State => (&assignment.states, structure.states.len()),
            Sort::Nbhd => (&assignment.nbhds, structure.nbhds.len()),
        };
        match map.get(&name) {
            None => return Err(FolError::UnassignedVariable(name)),
            Some(&v) if v >= bound => return Err(FolError::AssignmentOutOfRange(name)),
            Some(_) => {}
        }
    }
    let mut env = Env {
        states: assignment.states.iter().map(|(k, &v)| (k.as_str(), v)).collect(),
        nbhds: assignment.nbhds.iter().map(|(k, &v)| (k.as_str(), v)).collect(),
    };
    Ok(eval(structure, phi, &mut env))
}

fn eval<'a>(st: &TwoSortedStructure, phi: &'a FolFormula, env: &mut Env<'a>) -> bool {
    match phi {
        FolFormula::StateEq(a, b) => env.get(Sort::State, a) == env.get(Sort::State, b),
        FolFormula::NbhdEq(a, b) => env.get(Sort::Nbhd, a) == env.get(Sort::Nbhd, b),
        FolFormula::Pred(i, x) => st
            .preds
            .get(i)
            .is_some_and(|set| set.contains(env.get(Sort::State, x))),
        FolFormula::N(x, u) => st.n.contains(&(env.get(Sort::State, x), env.get(Sort::Nbhd, u))),
        FolFormula::E(u, x) => st.e.contains(&(env.get(Sort::Nbhd, u), env.get(Sort::State, x))),
        FolFormula::Not(f) => !eval(st, f, env),
        FolFormula::And(a, b) => eval(st, a, env) && eval(st, b, env),
        FolFormula::Iff(a, b) => eval(st, a, env) == eval(st, b, env),
        FolFormula::Exists(sort, v, body) | FolFormula::Forall(sort, v, body) => {
            let universal = matches!(phi, FolFormula::Forall(..));
            let size = if *sort == Sort::State {
                st.states.len()
            } else {
                st.nbhds.len()
            };
            let mut result = universal;
            for value in 0..size {
                let stack = if *sort == Sort::State {
                    &mut env.states
                } else {
                    &mut env.nbhds
                };
                stack.push((v.as_str(), value));
                let holds = eval(st, body, env);
                let stack = if *sort == Sort::State {
                    &mut env.states
                } else {
                    &mut env.nbhds
                };
                stack.pop();
                if holds != universal {
                    result = !universal;
                    break;
                }
            }
            result
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NaxViolation {
    /// A neighbourhood element that is nobody's neighbourhood.
    Orphan { nbhd: usize },
    /// Two distinct neighbourhood elements with the same members.
    Duplicate { first: usize, second: usize },
}

/// A1: `Au Ex (x N u)`.
pub fn axiom_a1() -> FolFormula {
    FolFormula::forall(
        Sort::Nbhd,
        "u",
        FolFormula::exists(Sort::State, "x", FolFormula::N("x".into(), "u".into())),
    )
}

/// A2: `Au Av (Ax (u E x <-> v E x) -> u = v)`.
pub fn axiom_a2() -> FolFormula {
    FolFormula::forall(
        Sort::Nbhd,
        "u",
        FolFormula::forall(
            Sort::Nbhd,
            "v",
            FolFormula::implies(
                FolFormula::forall(
                    Sort::State,
                    "x",
                    FolFormula::iff(
                        FolFormula::E("u".into(), "x".into()),
                        FolFormula::E("v".into(), "x".into()),
                    ),
                ),
                FolFormula::NbhdEq("u".into(), "v".into()),
            ),
        ),
    )
}

/// Checks both axioms directly; the first violation found is returned.
pub fn nax_check(structure: &TwoSortedStructure) -> Result<(), NaxViolation> {
    let owners: BTreeSet<usize> = structure.n.iter().map(|&(_, u)| u).collect();
    if let Some(nbhd) = (0..structure.nbhds.len()).find(|u| !owners.contains(u)) {
        return Err(NaxViolation::Orphan { nbhd });
    }
    let mut seen: HashMap<StateSet, usize> = HashMap::new();
    for u in 0..structure.nbhds.len() {
        if let Some(&first) = seen.get(&structure.extension(u)) {
            return Err(NaxViolation::Duplicate { first, second: u });
        }
        seen.insert(structure.extension(u), u);
    }
    Ok(())
}

/// A structure isomorphism given by its two component maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureIso {
    pub states: Vec<usize>,
    pub nbhds: Vec<usize>,
}

impl StructureIso {
    /// Bijective on both sorts and preserving every relation both ways.
    pub fn verify(&self, from: &TwoSortedStructure, to: &TwoSortedStructure) -> bool {
        let bijective = |map: &[usize], n: usize| {
            map.len() == n && map.iter().collect::<BTreeSet<_>>().len() == n && map.iter().all(|&x| x < n)
        };
        if from.states.len() != to.states.len()
            || from.nbhds.len() != to.nbhds.len()
            || !bijective(&self.states, to.states.len())
            || !bijective(&self.nbhds, to.nbhds.len())
        {
            return false;
        }
        let n: BTreeSet<_> = from
            .n
            .iter()
            .map(|&(s, u)| (self.states[s], self.nbhds[u]))
            .collect();
        let e: BTreeSet<_> = from
            .e
            .iter()
            .map(|&(u, s)| (self.nbhds[u], self.states[s]))
            .collect();
        let preds_match = from.preds.keys().chain(to.preds.keys()).all(|p| {
            let src = from.preds.get(p).copied().unwrap_or_default();
            let dst = to.preds.get(p).copied().unwrap_or_default();
            src.iter().map(|s| self.states[s]).collect::<StateSet>() == dst
        });
        n == to.n && e == to.e && preds_match
    }
}

/// The model of a structure satisfying both axioms, with the isomorphism
/// from the structure onto the structure of that model.
pub fn nbm(structure: &TwoSortedStructure) -> Result<(NeighbourhoodModel, StructureIso), FolError> {
    nax_check(structure).map_err(FolError::NaxViolation)?;
    let mut nbhd = vec![Collection::new(); structure.states.len()];
    for &(s, u) in &structure.n {
        nbhd[s].insert(structure.extension(u));
    }
    let model = NeighbourhoodModel::from_parts(structure.states.clone(), nbhd, structure.preds.clone())?;
    let image = fotrans(&model);
    let position: HashMap<StateSet, usize> =
        (0..image.nbhds.len()).map(|u| (image.extension(u), u)).collect();
    let iso = StructureIso {
        states: (0..structure.states.len()).collect(),
        nbhds: (0..structure.nbhds.len())
            .map(|u| position[&structure.extension(u)])
            .collect(),
    };
    debug_assert!(iso.verify(structure, &image));
    Ok((model, iso))
}
