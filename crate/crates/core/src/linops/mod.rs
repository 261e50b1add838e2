//! Complex linear algebra and convex-geometry primitives shared by the solvers.

pub mod eigen;
pub mod layout;
pub mod matrix;
pub mod project;
pub mod random;
pub(crate) mod solve;
pub mod states;

pub use eigen::{bottom_eigpair, eigh, top_eigpair, HermitianEigen};
pub use layout::{partial_trace, Player, Register, RegisterLayout};
pub use matrix::{tensor, ComplexMatrix};
pub use project::{project_fiber, project_fiber_affine, project_psd};
pub use random::{random_density, random_observable};
pub use states::{DensityMatrix, Observable};
