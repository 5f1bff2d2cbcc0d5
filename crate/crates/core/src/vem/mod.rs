//! Lowest-order (k = 1) virtual element operators for plane elasticity.
//!
//! Degrees of freedom are the two displacement components at every vertex,
//! ordered `[u_x(v0), u_y(v0), u_x(v1), ...]` locally and by free vertex
//! globally.

mod assembly;
mod local;
mod material;

pub use assembly::{assemble, assemble_with, element_operators, AssemblyOptions, DofMap, GlobalSystem};
pub use local::{
    energy_projector, l2_projector, local_mass, local_stiffness, stabilization_scaling,
    LocalOperators, PolyBasis, StabilizationScaling, POLY_DIM,
};
pub use material::{lame_from_engineering, Material};
