//! Independent checks of the discretization and of the Newton map.

mod dense;
mod frechet;
mod mms;

pub use dense::{dense_solve, interior_bubble};
pub use frechet::{frechet_harness, FrechetReport};
pub use mms::{mms_convergence_study, ManufacturedCase, MmsRow, MmsStudy, ERROR_QUADRATURE_DEGREE, STUDY_TOL};
