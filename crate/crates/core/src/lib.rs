//! Blockade-constrained many-body dynamics.
//!
//! Strong two-body penalties confine a chain of two-level atoms to the
//! solution set of a 2-SAT instance. Inside that space the dynamics is a
//! single-particle quantum walk on the solutions' Hamming graph, which is a
//! median graph. This crate builds those spaces and walks, propagates the
//! periodically driven clock chain over one period, and measures the
//! resulting quasi-energy statistics and eigenstate entanglement.

pub mod bits;
pub mod constraint;
pub mod construction;
pub mod entanglement;
pub mod error;
pub mod floquet;
pub mod graph;
pub mod hamiltonian;
pub mod linalg;
pub mod oracle;
pub mod space;
pub mod stats;

pub use bits::Bits;
pub use constraint::{Clause, ConstraintSet, Pattern};
pub use construction::{
    build_ln3_family, design_pipeline, pattern_to_space, DesignCertificate, DesignOptions, DesignOutcome, Ln3Family,
    Rejection, SparsityPattern,
};
pub use entanglement::{
    clock_entropy_rank2, coefficient_matrix, entropy_svd, local_x_expectation, Bipartition, CoefficientMatrix,
    EntanglementReport,
};
pub use error::{Error, ErrorKind, Result};
pub use floquet::{
    evolve_state, floquet_operator, floquet_operator_with, quasi_spectrum, quasi_spectrum_of, FloquetOperator,
    Integrator, PropagatorConfig, QuasiSpectrum,
};
pub use graph::{
    all_pairs_distances, build_hamming_graph, is_median_graph, is_median_graph_with, DistanceMatrix, HammingGraph,
    MedianTestOptions, MedianVerdict, MedianViolation,
};
pub use hamiltonian::{
    build_clock_hamiltonian, build_full_hamiltonian, build_walk_hamiltonian, project_to_subspace, DetuningSign,
    DriveProtocol, FullChainParams, HermitianTridiagonal, WalkMatrix,
};
pub use oracle::{bloch_oscillation_probe, exact_spectrum, oracle_half_chain_entropy, BlochSeries, ExactEigenpair};
pub use space::{enumerate_solutions, enumerate_solutions_with, recover_2sat, EnumerationLimits, SolutionSpace};
pub use stats::{circle_spacings, ks_distance_coe, mean_r_statistic, SpacingSample, SpectralReport};
