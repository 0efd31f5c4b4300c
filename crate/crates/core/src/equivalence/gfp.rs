use rayon::prelude::*;

use super::check::Context;
use super::{Certificate, EquivalenceReport, Kind};
use crate::model::{NeighbourhoodModel, Relation};

/// Greatest fixpoint of "keep the pairs that pass the per-pair test against
/// the current relation", starting from the full relation.
///
/// Each round evaluates all pairs against the same relation and removes
/// every failure at once, so the result does not depend on evaluation
/// order. A certificate is recorded for each pair when it is removed.
fn refine(kind: Kind, left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> EquivalenceReport {
    let mut current = Relation::full(left.len(), right.len());
    let mut certificates = Vec::new();
    loop {
        let ctx = Context::new(&current, left, right);
        let pairs: Vec<(usize, usize)> = current.iter().collect();
        let failed: Vec<Certificate> = pairs
            .par_iter()
            .filter_map(|&(a, b)| ctx.certificate(kind, a, b))
            .collect();
        if failed.is_empty() {
            break;
        }
        for cert in &failed {
            current.remove(cert.left, cert.right);
        }
        certificates.extend(failed);
    }
    certificates.sort_by_key(|c| (c.left, c.right));
    EquivalenceReport {
        kind,
        relation: current,
        certificates,
    }
}

pub fn bisimulation_report(left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> EquivalenceReport {
    refine(Kind::Bisimulation, left, right)
}

pub fn precocongruence_report(left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> EquivalenceReport {
    refine(Kind::Precocongruence, left, right)
}

/// The union of all bisimulations between the two models.
pub fn largest_bisimulation(left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> Relation {
    bisimulation_report(left, right).relation
}

/// The union of all precocongruences between the two models.
pub fn largest_precocongruence(left: &NeighbourhoodModel, right: &NeighbourhoodModel) -> Relation {
    precocongruence_report(left, right).relation
}
