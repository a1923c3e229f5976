//! Candidate subspaces of the coefficient space and the approximant
//! families `t ↦ H(t)` drawn from them.

mod family;
pub mod families;
mod lq;
mod scan;
mod subspace;

pub use family::{best_l2_family, ApproximantFamily, ApproximantRule};
pub use lq::{best_lq_approximation, best_lq_on_grid, LqSolution, MAX_ITERATIONS, WEIGHT_FLOOR};
pub use scan::{sup_error_scan, ErrorScan, ScanGrid};
pub use subspace::{orthonormalize, project, Subspace, GRAM_TOL};
