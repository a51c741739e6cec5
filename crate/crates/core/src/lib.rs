//! Constraint satisfaction over reducts of Henson graphs and homogeneous
//! equivalence relations: type calculus, canonical behaviours, tractable
//! solvers, a brute-force oracle and a complexity classifier.

pub mod acceptance;
pub mod affine;
pub mod behaviour;
pub mod classify;
pub mod corpus;
pub mod error;
pub mod gadgets;
pub mod horn;
pub mod model;
pub mod oracle;
pub mod solve;

pub use behaviour::{behaviour_catalog, Behaviour};
pub use classify::{classify, classify_with, ClassifyOptions, Verdict, VerdictOutcome};
pub use error::{Error, Result};
pub use model::{
    compile_formula, enumerate_types, validate_type, BaseStructure, Card, Instance, OrbitRelation,
    Outcome, PairType, Signature, Status, TypeMatrix,
};
pub use oracle::{oracle_solve, DEFAULT_ORACLE_CAP};
pub use solve::{solve, Prepared, SolverChoice, SolverId};
