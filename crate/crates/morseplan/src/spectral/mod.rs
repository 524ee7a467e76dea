//! Spectral solver for the forward and backward equations in the
//! quasi-number basis.

mod basis;
mod eigen;
mod hamiltonian;
mod solver;
mod weights;

pub use basis::{basis_values, QuasiNumberBasis};
pub use eigen::{eigendecompose, SpectralDecomposition};
pub use hamiltonian::{build_hamiltonian, Branch, HamiltonianMatrix};
pub use solver::{
    bke_tail_probability, fpe_density, DecompositionCache, ProbabilityValue, SolverConfig,
    Column, SpectralSolver, TailQuery,
};
pub use weights::{
    backward_initial_weights, evolve, forward_initial_weights, WeightKind, WeightVector,
};
