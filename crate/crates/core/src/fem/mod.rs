//! Taylor-Hood (P2/P1) finite elements on triangles.

pub mod assembly;
pub mod dirichlet;
pub mod dofmap;
pub mod element;
pub mod quadrature;

pub use assembly::{
    assemble_divergence, assemble_load, assemble_newton_linearization, assemble_picard_linearization,
    assemble_saddle, assemble_vector_laplacian, assemble_vector_mass, trilinear_b,
};
pub use dirichlet::{apply_dirichlet, apply_homogeneous_dirichlet, SaddleSystem};
pub use dofmap::{GaugeConstraint, MixedDofMap};
pub use element::ElementGeometry;
pub use quadrature::QuadratureRule;
