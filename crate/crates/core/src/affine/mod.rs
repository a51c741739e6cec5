//! GF(2) algebra and the two affine solvers.

pub mod gf2;
pub mod minority;
pub mod parity;

pub use gf2::{affine_hull, gf2_solve, BitVec, Gf2Result, Gf2System};
pub use minority::{injectivize, solve_c2w_minority, InjConstraint, Injectivize, Injectivized};
pub use parity::{
    compile_parity, compile_parity_signature, solve_cw2_parity, CompiledParity, ParityClause,
    ParityCompile, ParityHead,
};
