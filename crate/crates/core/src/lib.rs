//! Explicit monotone schemes for nonlocal parabolic Hamilton-Jacobi equations
//! posed on a bounded box with Dirichlet data prescribed on the whole exterior.
//!
//! The equation is
//!
//! ```text
//! u_t - I[u](x) + H(x, t, u, Du) = 0   in Omega x (0, inf)
//! u = phi                              in Omega^c x (0, inf)
//! u(., 0) = u0                         on closure(Omega)
//! ```
//!
//! where `I` is an integro-differential operator with jump density
//! `K(z) |z|^{-(n + alpha)}`. Solutions may detach from `phi` on the boundary;
//! the scheme lets boundary nodes evolve with the interior update so the
//! detachment shows up as a measurable trace gap.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, run configuration
//! and the command-line front end live in the `nlhj` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod boundary;
pub mod certificate;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod hamiltonians;
pub mod harness;
pub mod kernels;
mod math;
pub mod operators;
pub mod solver;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use certificate::Certificate;
pub use error::{Error, Result};
pub use geometry::{Domain, NodeClass, Point};
pub use grid::Lattice;
pub use hamiltonians::{
    BellmanSpec, Coefficient, CoerciveSpec, Control, FluxKind, HamiltonianSpec, VectorCoefficient,
};
pub use kernels::{Kernel, QuadratureTable};
pub use operators::{Field, Region, TracePolicy};
pub use solver::{Scheme, SchemeConfig, SolveState, StepControl};
