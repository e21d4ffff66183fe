//! Weighted least-squares systems built from operator specifications, their
//! minimum-norm solution and error measures.

mod solve;
mod spec;

pub use solve::{evaluate_solution, l2_relative_error, solve_min_norm_lsq, LsqSolution, Solution, RANK_CUTOFF};
pub(crate) use solve::{residual, solve_dense};
pub use spec::{
    assemble_block, assemble_matrix, assemble_system, column_offsets, Block, Coefficient, DataFn, DerivativeMethod,
    LinearSystem, OperatorSpec, ScalarFn, Term,
};
