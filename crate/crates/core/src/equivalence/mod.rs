//! Bisimulations, precocongruences, (pre)congruences, cocongruences and
//! behavioural equivalence between finite neighbourhood models.
//!
//! Checkers return a [`Verdict`]; a failing verdict carries a
//! [`Certificate`] naming the offending pair and a witness that can be
//! re-checked independently with [`Certificate::refutes`].

mod check;
mod gfp;
pub mod oracle;
mod refinement;

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::model::{MorphismViolation, NeighbourhoodModel, Relation, StateSet};
use crate::syntax::Formula;

pub use check::{
    cocongruence_check, is_bisimulation, is_congruence, is_precocongruence, is_precocongruence_via_pushout,
    is_precongruence, is_precongruence_via_quotient,
};
pub use gfp::{bisimulation_report, largest_bisimulation, largest_precocongruence, precocongruence_report};
pub use refinement::{
    behavioural_equivalence, behavioural_report, distinguishing_formula, largest_congruence, Refinement,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Bisimulation,
    Precocongruence,
    Behavioural,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Bisimulation => "bisimulation",
            Kind::Precocongruence => "precocongruence",
            Kind::Behavioural => "behavioural",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Violation {
    /// The paired states disagree on an atom.
    Atom { atom: u32 },
    /// Two sets with the same trace on `dom(R)` (left) or `rng(R)` (right),
    /// only one of which is a neighbourhood of the paired state on that side.
    DomainSplit {
        side: Side,
        member: StateSet,
        non_member: StateSet,
    },
    /// An `R`-coherent pair on which the two neighbourhood collections
    /// disagree.
    CoherentPair { left: StateSet, right: StateSet },
    /// A formula true at exactly one of the two states.
    Distinguished { formula: Formula },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Certificate {
    pub left: usize,
    pub right: usize,
    pub violation: Violation,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pair ({}, {}): ", self.left, self.right)?;
        match &self.violation {
            Violation::Atom { atom } => write!(f, "disagree on p{atom}"),
            Violation::DomainSplit {
                side,
                member,
                non_member,
            } => write!(
                f,
                "{} sets {member:?} and {non_member:?} agree on the relation but only the first is a neighbourhood",
                side.as_str()
            ),
            Violation::CoherentPair { left, right } => {
                write!(f, "coherent pair ({left:?}, {right:?}) is not agreed")
            }
            Violation::Distinguished { formula } => write!(f, "distinguished by {formula}"),
        }
    }
}

impl Certificate {
    /// Whether the witness really refutes the pair against `rel` (for
    /// relation-dependent witnesses) in the given models.
    pub fn refutes(&self, rel: &Relation, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> bool {
        let (s1, s2) = (self.left, self.right);
        if s1 >= left.len() || s2 >= right.len() {
            return false;
        }
        match &self.violation {
            Violation::Atom { atom } => {
                left.valuation(*atom).contains(s1) != right.valuation(*atom).contains(s2)
            }
            Violation::DomainSplit {
                side,
                member,
                non_member,
            } => {
                let (model, state, trace) = match side {
                    Side::Left => (left, s1, rel.domain()),
                    Side::Right => (right, s2, rel.range()),
                };
                member.intersection(trace) == non_member.intersection(trace)
                    && model.has_neighbourhood(state, *member)
                    && !model.has_neighbourhood(state, *non_member)
            }
            Violation::CoherentPair { left: u1, right: u2 } => {
                crate::model::is_coherent_pair(rel, *u1, *u2)
                    && left.has_neighbourhood(s1, *u1) != right.has_neighbourhood(s2, *u2)
            }
            Violation::Distinguished { formula } => {
                left.truth_set(formula).contains(s1) != right.truth_set(formula).contains(s2)
            }
        }
    }

    pub fn to_json(&self, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> Value {
        let pair = json!([left.name(self.left), right.name(self.right)]);
        match &self.violation {
            Violation::Atom { atom } => {
                json!({"pair": pair, "violation": "atom", "atom": format!("p{atom}")})
            }
            Violation::DomainSplit {
                side,
                member,
                non_member,
            } => {
                let model = if *side == Side::Left { left } else { right };
                json!({
                    "pair": pair,
                    "violation": "domain-split",
                    "side": side.as_str(),
                    "member": model.names_of(*member),
                    "non_member": model.names_of(*non_member),
                })
            }
            Violation::CoherentPair { left: u1, right: u2 } => json!({
                "pair": pair,
                "violation": "coherent-pair",
                "left": left.names_of(*u1),
                "right": right.names_of(*u2),
            }),
            Violation::Distinguished { formula } => json!({
                "pair": pair,
                "violation": "distinguished",
                "formula": formula.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Certificate),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(c) => Some(c),
        }
    }
}

/// The relation computed by one of the engines, plus a certificate for
/// every pair it rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub kind: Kind,
    pub relation: Relation,
    pub certificates: Vec<Certificate>,
}

impl EquivalenceReport {
    pub fn to_json(&self, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> Value {
        json!({
            "kind": self.kind.as_str(),
            "pairs": self.relation.to_names(left, right),
            "certificates": self
                .certificates
                .iter()
                .map(|c| c.to_json(left, right))
                .collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivalenceError {
    #[error("relation is not an equivalence relation")]
    NotAnEquivalence,
    #[error("relation does not match the carriers")]
    ShapeMismatch,
    #[error("{side} map is not a bounded morphism: {violation:?}")]
    NotABoundedMorphism {
        side: &'static str,
        violation: MorphismViolation,
    },
    #[error("brute force over {size} exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
}

/// Atoms declared by either model.
pub(crate) fn shared_support(left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> BTreeSet<u32> {
    left.atom_support()
        .union(&right.atom_support())
        .copied()
        .collect()
}

pub(crate) fn atom_violation(
    atoms: &BTreeSet<u32>,
    left: &NeighbourhoodModel,
    s1: usize,
    right: &NeighbourhoodModel,
    s2: usize,
) -> Option<Violation> {
    atoms
        .iter()
        .find(|&&p| left.valuation(p).contains(s1) != right.valuation(p).contains(s2))
        .map(|&atom| Violation::Atom { atom })
}
