//! Symbolic expression representation, satisfiability oracle, and
//! SMT-LIB2 serialization shared by the replay engine and the stitcher.

pub mod cnf;
pub mod expr;
pub mod solve;

pub use expr::{eval, BvBin, CmpOp, ExprPool, ExprRef, Node, Sort, Val};
pub use solve::{
    model_satisfies, solve, Conjunct, ConstraintSet, Provenance, SolveResult,
    DEFAULT_SOLVER_BUDGET,
};
