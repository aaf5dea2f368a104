//! Reconstruction of the frequency-domain (elliptic) Neumann-to-Dirichlet map
//! from the time-domain (hyperbolic) Neumann-to-Dirichlet map on a 1D
//! interval, using the boundary control method with Tikhonov regularization.
//!
//! The pipeline is
//! [`grid`] → [`wave`] (hyperbolic map `Λ`) → [`reconstruction`]
//! (connecting operator `K`, regularized normal system, reconstructed map),
//! with [`elliptic`] supplying ground truth and [`harness`] driving the
//! experiments and reports.

pub mod elliptic;
pub mod error;
pub mod grid;
pub mod harness;
pub mod matrix;
pub mod operators;
pub mod reconstruction;
pub mod wave;

#[cfg(test)]
pub(crate) mod test_support;

pub use elliptic::{elliptic_nd_map, elliptic_solve, EllipticNdMap, NeumannClosure};
pub use error::{Error, Result};
pub use grid::{build_grid, Grid};
pub use matrix::{ComplexMatrix, DenseMatrix, RealMatrix, Scalar};
pub use operators::{apply_s_star, build_operators, BoundarySignal, OperatorSet, SignalAxis};
pub use reconstruction::{
    assemble_k, build_regularized_system, reconstruct, stability_probe, ConnectingOperator,
    NormalTerms, ReconstructionResult, RegularizedSystem, StabilityProbe, SystemForm,
};
pub use wave::{assemble_hyperbolic_nd_map, wave_solve, Coefficients, HyperbolicNdMap, WaveField};
