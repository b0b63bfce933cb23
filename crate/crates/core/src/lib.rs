//! Krein-space (J-Hermitian) quantum mechanics on finite one-dimensional grids.
//!
//! States live on a symmetric grid with an exact parity involution `J`. The
//! crate provides the Dirac, Krein and `J` inner products, Krein adjoints and
//! Hermiticity tests, finite-difference Hamiltonians (including the
//! `x^2 (ix)^epsilon` family), Krein-norm classification of spectra, exact
//! propagators, and the discrete continuity equation for
//! `w(x, t) = conj(psi(x, t)) psi(-x, t)`.

pub mod error;
pub mod evolution;
pub mod grid;
pub mod hamiltonian;
pub mod involution;
pub mod krein;
pub mod operator;
pub mod spectral;
pub mod state;

pub type C64 = num_complex::Complex64;

pub use error::{KreinError, Result};
pub use evolution::{
    check_hilbert_unitarity, check_krein_unitarity, continuity_residual, evolve, expm, propagator,
    ContinuityTrace, EvolutionTrace, NormDrift, Propagator, PropagatorMethod,
};
pub use grid::{Boundary, Grid, PhysicalConstants};
pub use hamiltonian::{
    build_hamiltonian, build_kinetic, build_kinetic_with_stencil, build_momentum, build_position,
    is_pt_symmetric_potential, sample_potential, HamiltonianSpec, PotentialSpec, StencilOrder,
};
pub use involution::{Involution, InvolutionKind};
pub use krein::{
    adjoint_axiom_residuals, default_hermiticity_tol, dirac_inner, even_odd_decompose,
    is_j_hermitian, is_krein_skew_hermitian, j_inner, j_product_adjoint_identity, krein_adjoint,
    krein_inner, krein_inner_reflected, AxiomResiduals, Check, DecompositionResult,
};
pub use operator::OperatorMatrix;
pub use spectral::{
    analyze_spectrum, classify_spectrum, eigendecompose, verify_reality_theorem, Classification,
    EigenPair, SpectralTolerances, SpectrumReport, TheoremViolation,
};
pub use state::StateVector;

/// Runs every dense kernel on the calling thread. Multithreaded reductions
/// may sum in a thread-count dependent order; this makes results
/// bit-reproducible across machines.
pub fn use_sequential_kernels() {
    faer::set_global_parallelism(faer::Par::Seq);
}
