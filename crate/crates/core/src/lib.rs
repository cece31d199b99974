//! Feasibility and optimal success probabilities for probabilistic
//! pure-state transformation machines.
//!
//! A machine `{|Φᵢ⟩ → |Ψᵢ⟩}` with success probabilities `γᵢ` exists exactly
//! when there are normalized flag states `|P⁽ⁱ⁾⟩` such that
//! `X − √Γ·Y·√Γ` is positive semidefinite, where `X` is the Gram matrix of
//! the inputs, `Y` the entrywise product of the output and flag Gram
//! matrices, and `Γ = diag(γ)`. Everything in this crate works at that
//! Gram-matrix level.
//!
//! - [`gram`]: state sets, Gram matrices, PSD tests, factorization and null spaces.
//! - [`feasibility`]: the existence test, flag-Gram search and the support
//!   obstruction coming from linear dependencies among the inputs.
//! - [`twostate`]: exact two-state machinery (achievable region, optimal
//!   success probability, and the two-step decomposition).
//! - [`symmetric`]: equal-overlap state families and the bounds separating
//!   quantum from classical one-way assistance.

#![forbid(unsafe_code)]

pub mod error;
pub mod feasibility;
pub mod gram;
pub mod symmetric;
pub mod twostate;

mod serde_cplx;

pub use error::{Error, Result};
pub use gram::{GramMatrix, NullVector, PsdVerdict, StateSet, Tolerances};

/// Complex scalar used throughout the crate.
pub type C64 = nalgebra::Complex<f64>;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
