//! Finite neighbourhood semantics for classical modal logic.
//!
//! The crate is organised bottom-up:
//!
//! - [`syntax`]: formulas, parser, printer, subformula closure;
//! - [`model`]: neighbourhood models, truth sets, bounded morphisms, coherence;
//! - [`constructions`]: disjoint unions, quotients, pushouts, pullbacks, kernels;
//! - [`equivalence`]: bisimulations, precocongruences, congruences and
//!   behavioural equivalence, with brute-force oracles;
//! - [`classes`]: Kripke, monotonic and augmented models, cores and base sets;
//! - [`ufext`]: ultrafilter extensions;
//! - [`fol`]: the two-sorted first-order bridge;
//! - [`decision`]: satisfiability, validity, consequence and interpolation.

pub mod classes;
pub mod constructions;
pub mod decision;
pub mod equivalence;
pub mod fixtures;
pub mod fol;
pub mod model;
pub mod syntax;
pub mod ufext;

pub use model::{NeighbourhoodModel, Relation, StateFunction, StateSet};
pub use syntax::{parse, Formula};
