//! Non-equilibrium steady states of translation-invariant free-fermion
//! chains with local linear Lindblad reservoirs, and the reservoir-induced
//! criticality of those states.
//!
//! * [`lattice`]: models, generator vectors, damping matrices and symbols.
//! * [`ness`]: finite Lyapunov solves, time evolution, symbol solves,
//!   quadrature and Wick contractions.
//! * [`criticality`]: rational symbol analysis, roots, exponents.
//! * [`experiments`]: sweeps, fits, figure data and an exact Liouvillian
//!   oracle for tiny chains.

pub mod criticality;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod linalg;
pub mod ness;

pub use error::{NessError, Result};
pub use lattice::{
    build_damping_matrices, build_generator_vectors, build_symbol_matrices, reservoir_symbol, Chain,
    ComplexAmplitude, DampingMatrices, HamiltonianStencil, LatticeModel, LindbladGenerator, Species,
    StencilTerm,
};
pub use ness::{CorrelationMatrix, CorrelationProfile};
