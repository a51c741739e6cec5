//! Base structures, atomic types, relations, formulas and instances.

pub mod base;
pub(crate) mod clique;
pub mod formula;
pub mod matrix;
pub mod relation;

pub use base::{BaseJson, BaseStructure, Card, PairType};
pub use formula::{compile_formula, compile_formula_with_cap, AtomKind, Formula};
pub(crate) use matrix::type_space;
pub use matrix::{
    enumerate_types, enumerate_types_with_cap, is_valid, pair_count, pair_index, pairs,
    validate_type, TypeMatrix, Violation, DEFAULT_ARITY_CAP,
};
pub use relation::{
    Constraint, ConstraintJson, Instance, InstanceJson, OrbitRelation, Outcome, RelationJson,
    Signature, SignatureJson, Status, WitnessJson,
};
