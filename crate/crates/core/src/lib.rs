//! Newton and Anderson-accelerated Newton solvers for the steady
//! incompressible Navier-Stokes equations on the unit square, discretized with
//! Taylor-Hood (P2/P1) finite elements.
//!
//! The pipeline is `mesh` → `fem` (dofs, assembly, boundary data) → `linalg`
//! (sparse LU) → `nse` (solution operators) → `anderson` / `driver`
//! (nonlinear iteration). `verify` holds the independent oracles.

pub mod anderson;
pub mod driver;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod nse;
pub mod verify;

pub use anderson::{AndersonHistory, MixResult};
pub use driver::{
    estimate_order, run, run_sweep, sweep_configs, InitialGuess, IterationLog, IterationRecord, Method, RunStatus,
    SolverConfig, SweepRow, DEFAULT_BLOWUP,
};
pub use error::{Error, Result};
pub use fem::MixedDofMap;
pub use linalg::CsrMatrix;
pub use mesh::{build_unit_square_mesh, validate, BoundaryTag, Mesh, Pattern, Violation};
pub use nse::{frechet_operator, newton_operator, picard_operator, residual, ProblemSetup, State};
