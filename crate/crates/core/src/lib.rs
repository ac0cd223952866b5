//! Simulation and verification engine for quantum-programmable projective
//! measurements.
//!
//! One photon in state φ and `M-1` photons in state ψ enter an `M`-mode
//! interferometer built from an abelian group (Hadamard-Walsh for
//! `(Z/2)^n`, the Fourier transform for `Z/M`). A classical congruence test
//! on the detected photon-number pattern outputs 0 ("identical") with
//! probability `1/M + (M−1)/M·|⟨φ|ψ⟩|²`, the optimal one-sided error.
//!
//! - [`matrix`]: complex matrices, exact root-of-unity matrices, permanents.
//! - [`interferometers`]: group unitaries and the beam-splitter network for `H_n`.
//! - [`photon_stats`]: exact detection statistics, bounds, sampling.
//! - [`postprocess`]: the decision rule and its consistency reports.
//! - [`swap_circuit`]: controlled-swap circuit simulator and the
//!   symmetric-subspace bound, used as an independent oracle.

pub mod cyclotomic;
pub mod error;
pub mod interferometers;
pub mod matrix;
pub mod pattern;
pub mod photon_stats;
pub mod postprocess;
pub mod swap_circuit;

pub use error::{Error, Result};
pub use interferometers::{
    decompose_hadamard, generator_rows, group_unitary, hadamard_walsh, qft, reconstruct,
    BeamSplitterLayer, Decomposition, GroupSpec,
};
pub use matrix::{
    is_unitary, permanent_naive, permanent_ryser, random_unitary, remove_row, repeat_columns,
    ComplexMatrix, RootOfUnityMatrix, C64,
};
pub use pattern::{enumerate_patterns, DetectionPattern};
pub use photon_stats::{
    prob_distinguishable, prob_indistinguishable, prob_mixture, sample, verify_bound, BoundReport,
    OverlapSpec, PatternDistribution,
};
pub use postprocess::{
    accept, acceptance_probability, analytic_acceptance, equivalence_report, pi_value,
    DecisionRule, Outcome,
};
pub use swap_circuit::{
    accept_probability, build_layout, copies_lower_bound, post_measurement_state, symmetric_bound,
    CircuitLayout, LayoutVariant, QuditState,
};
