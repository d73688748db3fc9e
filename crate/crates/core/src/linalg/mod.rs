//! Sparse storage, direct saddle-point solves, and Anderson least squares.

mod anderson_ls;
mod csr;
mod sparse_lu;

pub use anderson_ls::{solve_anderson_ls, DenseLsProblem, LsSolution, CONDITION_LIMIT, TIKHONOV_SCALE};
pub use csr::{dot, norm2, CsrMatrix};
pub use sparse_lu::{sparse_solve, SparseLu, RESIDUAL_FACTOR};
