mod common;

use std::collections::BTreeSet;

use nbhd_core::classes::{self, KripkeModel};
use nbhd_core::constructions::{disjoint_union, kernel, quotient};
use nbhd_core::equivalence::{
    behavioural_equivalence, cocongruence_check, distinguishing_formula, is_bisimulation, is_precocongruence,
    is_precocongruence_via_pushout, is_precongruence, is_precongruence_via_quotient, largest_bisimulation,
    largest_congruence, largest_precocongruence,
};
use nbhd_core::fol::{fol_eval, fotrans, st, Assignment};
use nbhd_core::model::{functor_image, is_bounded_morphism, Collection};
use nbhd_core::ufext::ultrafilter_extension;
use nbhd_core::{Formula, NeighbourhoodModel, Relation, StateFunction, StateSet};
use proptest::prelude::*;

use common::*;

fn arb_relation(n1: usize, n2: usize) -> impl Strategy<Value = Relation> {
    prop::collection::btree_set((0..n1.max(1), 0..n2.max(1)), 0..=n1 * n2).prop_map(move |pairs| {
        Relation::new(n1, n2, pairs.into_iter().filter(|&(a, b)| a < n1 && b < n2)).unwrap()
    })
}

fn arb_model_and_relation(
    max_states: usize,
    atoms: u32,
) -> impl Strategy<Value = (NeighbourhoodModel, Relation)> {
    arb_model(max_states, atoms).prop_flat_map(|m| {
        let n = m.len();
        (Just(m), arb_relation(n, n))
    })
}

fn arb_pair_and_relation(
    max_states: usize,
    atoms: u32,
) -> impl Strategy<Value = (NeighbourhoodModel, NeighbourhoodModel, Relation)> {
    (arb_model(max_states, atoms), arb_model(max_states, atoms)).prop_flat_map(|(l, r)| {
        let (n1, n2) = (l.len(), r.len());
        (Just(l), Just(r), arb_relation(n1, n2))
    })
}

fn atoms_of(a: &NeighbourhoodModel, b: &NeighbourhoodModel) -> BTreeSet<u32> {
    a.atom_support().union(&b.atom_support()).copied().collect()
}

/// `M1 + M2` divided by its largest congruence, with the maps from both
/// summands: a cocongruence by construction.
fn common_quotient(
    l: &NeighbourhoodModel,
    r: &NeighbourhoodModel,
) -> (NeighbourhoodModel, StateFunction, StateFunction) {
    let sum = disjoint_union(l, r).unwrap();
    let congruence = largest_congruence(&sum.model);
    let q = quotient(&sum.model, &congruence.to_relation()).unwrap();
    (q.model, q.map.after(&sum.inl), q.map.after(&sum.inr))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn bounded_morphisms_preserve_truth(m in arb_model(4, 2), phi in arb_formula(2, 3)) {
        let q = quotient(&m, &largest_congruence(&m).to_relation()).unwrap();
        let sum = disjoint_union(&m, &q.model).unwrap();
        let maps = [
            (q.map.clone(), &m, &q.model),
            (sum.inl.clone(), &m, &sum.model),
            (sum.inr.clone(), &q.model, &sum.model),
        ];
        for (f, source, target) in maps {
            prop_assert!(is_bounded_morphism(&f, source, target, &atoms_of(source, target)));
            for s in 0..source.len() {
                prop_assert_eq!(source.satisfies(s, &phi).unwrap(), target.satisfies(f.apply(s), &phi).unwrap());
            }
        }
    }

    #[test]
    fn boxtimes_of_a_truth_set_is_the_box(m in arb_model(4, 2), phi in arb_formula(2, 2)) {
        prop_assert_eq!(m.boxtimes(m.truth_set(&phi)), m.truth_set(&Formula::boxed(phi)));
    }

    #[test]
    fn equivalences_form_a_chain((l, r, rel) in arb_pair_and_relation(3, 1)) {
        if is_bisimulation(&rel, &l, &r).holds() {
            prop_assert!(is_precocongruence(&rel, &l, &r).holds());
        }
        let bis = largest_bisimulation(&l, &r);
        let pre = largest_precocongruence(&l, &r);
        let beh = behavioural_equivalence(&l, &r);
        prop_assert!(bis.is_subset(&pre));
        prop_assert!(pre.is_subset(&beh));
    }

    #[test]
    fn pushout_route_agrees_with_coherent_pairs((l, r, rel) in arb_pair_and_relation(3, 1)) {
        prop_assert_eq!(is_precocongruence(&rel, &l, &r).holds(), is_precocongruence_via_pushout(&rel, &l, &r));
    }

    #[test]
    fn precocongruences_on_one_model_are_precongruences((m, rel) in arb_model_and_relation(4, 1)) {
        let precong = is_precongruence(&rel, &m).holds();
        prop_assert_eq!(precong, is_precongruence_via_quotient(&rel, &m));
        if is_precocongruence(&rel, &m, &m).holds() {
            prop_assert!(precong);
        }
    }

    #[test]
    fn bitotal_cocongruences_are_precocongruences(l in arb_model(3, 1), r in arb_model(3, 1)) {
        let (n, f1, f2) = common_quotient(&l, &r);
        let cocong = cocongruence_check(&l, &r, &n, &f1, &f2).unwrap();
        prop_assert!(cocong.is_subset(&behavioural_equivalence(&l, &r)));
        if cocong.domain() == l.carrier() && cocong.range() == r.carrier() {
            prop_assert!(is_precocongruence(&cocong, &l, &r).holds());
        }
    }

    #[test]
    fn kernel_pairs_are_weakly_preserved(
        x in 1usize..=4,
        y in 1usize..=3,
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = rng(seed);
        let f = StateFunction::new((0..x).map(|_| rng.gen_range(0..y)).collect(), y).unwrap();
        let saturated = |u: StateSet| f.preimage(f.image(u)) == u;
        let n1: Collection = StateSet::all_subsets(x).filter(|_| rng.gen_bool(0.4)).collect();
        // same image under f: agree on saturated sets, anything elsewhere
        let n2: Collection = StateSet::all_subsets(x)
            .filter(|&u| if saturated(u) { n1.contains(&u) } else { rng.gen_bool(0.4) })
            .collect();
        prop_assert_eq!(functor_image(&f, &n1).unwrap(), functor_image(&f, &n2).unwrap());
        let k: Vec<(usize, usize)> = kernel(&f).iter().collect();
        let p1 = StateFunction::new(k.iter().map(|p| p.0).collect(), x).unwrap();
        let p2 = StateFunction::new(k.iter().map(|p| p.1).collect(), x).unwrap();
        let lifted: Collection = n1.iter().map(|&u| p1.preimage(u)).chain(n2.iter().map(|&u| p2.preimage(u))).collect();
        prop_assert_eq!(functor_image(&p1, &lifted).unwrap(), n1);
        prop_assert_eq!(functor_image(&p2, &lifted).unwrap(), n2);
    }

    #[test]
    fn monotonic_bases_are_unions_of_cores(m in arb_model(4, 1)) {
        let closed: Vec<Collection> = (0..m.len())
            .map(|s| {
                StateSet::all_subsets(m.len())
                    .filter(|v| m.neighbourhoods(s).iter().any(|u| u.is_subset(*v)))
                    .collect()
            })
            .collect();
        let mono = NeighbourhoodModel::from_parts(m.states().to_vec(), closed, m.valuations().clone()).unwrap();
        prop_assert!(classes::is_monotonic(&mono));
        for s in 0..mono.len() {
            let union = classes::core_neighbourhoods(&mono, s)
                .iter()
                .fold(StateSet::EMPTY, |acc, &u| acc.union(u));
            prop_assert_eq!(classes::minimal_base(&mono, s), union);
            prop_assert!(classes::is_base(&mono, s, union));
        }
    }

    #[test]
    fn kripke_models_round_trip(
        n in 1usize..=4,
        edges in prop::collection::btree_set((0usize..4, 0usize..4), 0..10),
        valuation in prop::collection::vec(0u64..16, 0..=2),
        phi in arb_formula(2, 3),
    ) {
        let edges = Relation::new(n, n, edges.into_iter().filter(|&(a, b)| a < n && b < n)).unwrap();
        let valuation = valuation
            .into_iter()
            .enumerate()
            .map(|(p, bits)| (p as u32, StateSet::from_bits(bits & ((1 << n) - 1))))
            .collect();
        let states = (0..n).map(|i| format!("k{i}")).collect();
        let k = KripkeModel::new(states, edges, valuation).unwrap();
        let m = classes::from_kripke(&k);
        prop_assert!(classes::is_augmented(&m));
        for s in 0..n {
            prop_assert_eq!(classes::core_neighbourhoods(&m, s), Collection::from([k.successors(s)]));
        }
        prop_assert_eq!(classes::to_kripke(&m).unwrap(), k.clone());
        prop_assert_eq!(k.truth_set(&phi), m.truth_set(&phi));
    }

    #[test]
    fn ultrafilter_extensions_keep_behavioural_equivalence(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (l, r) = random_pair(&mut rng, 3, 1);
        let (lu, ru) = (ultrafilter_extension(&l), ultrafilter_extension(&r));
        let lifted = behavioural_equivalence(&lu.model, &ru.model);
        for a in 0..l.len() {
            for b in 0..r.len() {
                if distinguishing_formula(&l, a, &r, b).is_none() {
                    prop_assert!(lifted.contains(lu.principal.apply(a), ru.principal.apply(b)));
                }
            }
        }
    }

    #[test]
    fn translations_are_invariant_under_behavioural_equivalence(seed in any::<u64>(), phi in arb_formula(1, 3)) {
        let mut rng = rng(seed);
        let (l, r) = random_pair(&mut rng, 3, 1);
        let beh = behavioural_equivalence(&l, &r);
        let translated = st(&phi, "x");
        let (fl, fr) = (fotrans(&l), fotrans(&r));
        for (a, b) in beh.iter() {
            let x = fol_eval(&fl, &translated, &Assignment::state("x", a)).unwrap();
            let y = fol_eval(&fr, &translated, &Assignment::state("x", b)).unwrap();
            prop_assert_eq!(x, y);
        }
    }
}
