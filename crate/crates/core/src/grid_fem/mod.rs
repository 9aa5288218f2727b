//! Plane-stress finite elements on a regular grid of unit squares and the
//! linear solve `K(ρ) U = F`.

mod element;
mod mesh;
mod model;
mod response;
mod skyline;
mod system;

pub use element::{element_energy, element_stiffness, ElementMatrix};
pub use mesh::GridMesh;
pub use model::{DisplacementField, ElastParams, LoadCase};
pub use response::{compliance, element_energies, element_sensitivities, external_work};
pub use system::{
    assemble_and_solve, DofOrdering, LinearSolver, SolveStats, SolverOptions, StiffnessSystem,
};
