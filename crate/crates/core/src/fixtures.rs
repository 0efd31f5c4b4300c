//! The small frames used throughout the documentation and tests.
//!
//! `T`, `S` and `U` with the maps `f1: T -> U` and `f2: S -> U` show
//! behavioural equivalence without a bisimulation; `T'` with `f1': T' -> U`
//! shows behavioural equivalence without a precocongruence.
//!
//! The augmentation of the Kripke model on the natural numbers with `m R n`
//! iff `m > n` is image-finite but not modally saturated: the formulas
//! `<>^n []false` are finitely satisfiable in the whole carrier but not
//! satisfiable in it. It needs an infinite carrier and is only documented
//! here.

use crate::model::{NeighbourhoodModel, StateFunction};

/// `T = {t1, t2, t3}`, `nu(t1) = nu(t2) = {{t2}}`, `nu(t3) = {{}}`.
pub fn t() -> NeighbourhoodModel {
    NeighbourhoodModel::builder(["t1", "t2", "t3"])
        .neighbourhood("t1", &["t2"])
        .neighbourhood("t2", &["t2"])
        .neighbourhood("t3", &[])
        .build()
        .expect("fixture T")
}

/// `T'`: `nu(t1) = {{t2}}`, `nu(t2) = nu(t3) = {{}}`.
pub fn t_prime() -> NeighbourhoodModel {
    NeighbourhoodModel::builder(["t1", "t2", "t3"])
        .neighbourhood("t1", &["t2"])
        .neighbourhood("t2", &[])
        .neighbourhood("t3", &[])
        .build()
        .expect("fixture T'")
}

/// `S = {s}` with `nu(s)` empty.
pub fn s() -> NeighbourhoodModel {
    NeighbourhoodModel::builder(["s"]).build().expect("fixture S")
}

/// `U = {u1, u2}`, `nu(u1)` empty, `nu(u2) = {{}}`.
pub fn u() -> NeighbourhoodModel {
    NeighbourhoodModel::builder(["u1", "u2"])
        .neighbourhood("u2", &[])
        .build()
        .expect("fixture U")
}

/// `t1, t2 -> u1`, `t3 -> u2`.
pub fn f1() -> StateFunction {
    StateFunction::new(vec![0, 0, 1], 2).expect("f1")
}

/// `s -> u1`.
pub fn f2() -> StateFunction {
    StateFunction::new(vec![0], 2).expect("f2")
}

/// `t1 -> u1`, `t2, t3 -> u2`.
pub fn f1_prime() -> StateFunction {
    StateFunction::new(vec![0, 1, 1], 2).expect("f1'")
}
