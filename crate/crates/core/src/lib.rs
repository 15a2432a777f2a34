//! hp-FEM for the integral fractional Laplacian `(-Δ)^s u = f` on (-1, 1) with
//! homogeneous exterior Dirichlet data.
//!
//! The stiffness matrix is assembled with singularity-adapted tensor Gauss
//! quadrature on each element pair; see [`assembly`]. Error estimators for
//! the model problem `f = 1` live in [`estimate`].

pub mod assembly;
pub mod error;
pub mod estimate;
pub mod mesh;
pub mod polynomials;
pub mod quadrature;
pub mod solver;
pub mod special;

pub use assembly::{
    assemble_load, assemble_stiffness, assemble_stiffness_with, AssemblyMode, AssemblyOptions, LoadVector,
    OpCounter, StiffnessMatrix,
};
pub use error::{Error, Result};
pub use mesh::{build_space, geometric_mesh, Element, Mesh1D, Space};
pub use solver::{cholesky_solve, energy, DiscreteSolution};
pub use special::{exact_energy, exact_solution, kernel_constant, FracParams};
