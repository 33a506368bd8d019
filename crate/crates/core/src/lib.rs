//! States, amplitudes, partial traces and Bell analysis for systems of
//! identical quantum particles, built on holistic (label-free) kets.
//!
//! An N-particle state |1,2,…,N⟩ lists the occupied single-particle states
//! without naming which particle occupies which. Transition amplitudes are
//! η-weighted permutation sums over single-particle overlaps — a permanent
//! for bosons (η = +1), a determinant for fermions (η = −1) — and every
//! entanglement quantity (projection probabilities, reduced density matrices,
//! von Neumann entropy, post-selected Bell correlations) is derived from
//! them. An independent labeled-tensor construction is included purely as a
//! cross-validation oracle.

pub mod amplitude;
pub mod error;
pub mod families;
pub mod hilbert;
pub mod labeled;
pub mod operators;
pub mod reduction;
pub mod slocc;
pub mod state;
pub mod verify;

pub use amplitude::{amplitude, amplitude_naive, permanent_ryser, OverlapMatrix};
pub use error::{Error, Result};
pub use families::{build_naive_w, build_spes, factor_spatial_spin, SpesSpec};
pub use hilbert::{basis_state, ModeBasis, SingleParticleState};
pub use operators::{annihilate, create, pair_annihilate, pair_create, OneBodyOperator};
pub use reduction::{
    dot, dot_slots, outcome_probability, partial_trace, partial_trace_over, von_neumann_entropy,
    CollectiveBasis, DensityMatrix,
};
pub use slocc::{bell_max, bell_value, concurrence, slocc_project, MeasurementSetting, SloccResult};
pub use state::{ElementaryKet, ManyParticleState, Statistics};
