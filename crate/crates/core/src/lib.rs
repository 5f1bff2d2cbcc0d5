//! Lowest-order virtual element discretization of the 2-D linear elasticity
//! eigenproblem on arbitrary polygonal meshes.
//!
//! The crate is organized bottom-up:
//!
//! - [`mesh`]: polygonal meshes, generators for the trapezoidal, hexagonal
//!   and vessel families, geometry and regularity queries.
//! - [`vem`]: material law, local projector / stiffness / mass operators and
//!   sparse global assembly with Dirichlet elimination.
//! - [`eig`]: smallest eigenpairs of the generalized problem `A w = λ B w`.
//! - [`estimator`]: residual a-posteriori indicator per element.
//! - [`adapt`]: maximum marking, polygon-splitting and newest-vertex
//!   bisection refinement, and the adaptive loop.
//! - [`fem_oracle`]: closed-form P1 triangle elements, an independent code
//!   path the virtual element operators must agree with on triangles.
//! - [`experiment`]: convergence fitting, the two benchmark drivers and
//!   report emission.
//!
//! ```no_run
//! use vem_spectra::{eig, mesh, vem};
//!
//! let mesh = mesh::generate_trapezoidal_mesh(16)?;
//! let material = vem::Material::new(7.7e3, 1.44e11, 0.35)?;
//! let system = vem::assemble(&mesh, &material)?;
//! let modes = eig::solve_smallest(&system.stiffness, &system.mass, 6, &eig::EigOptions::default())?;
//! println!("{:?}", modes.frequencies()?);
//! # Ok::<(), vem_spectra::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod eig;
mod error;
pub mod estimator;
pub mod experiment;
pub mod fem_oracle;
pub mod mesh;
pub mod sparse;
pub mod vem;

pub use error::{Error, Result};
