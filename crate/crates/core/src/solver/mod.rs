//! Linear-algebra engine for the saddle-point systems.

pub mod cg;
pub mod cholesky;
pub mod infsup;
pub mod schur;

pub use cg::{cg_solve, conjugate_gradient, CgOptions, CgOutcome, LinearOperator};
pub use cholesky::SkylineCholesky;
pub use infsup::{dense_inf_sup, estimate_inf_sup, InfSupEstimate, InfSupOptions};
pub use schur::{kkt_residual, schur_solve, schur_solve_from, InnerMethod, SchurOutcome, SolverSettings};
