//! Finite-dimensional quantum theory rewritten in terms of probabilities.
//!
//! A *reference apparatus* (an informationally complete `d²`-outcome POVM
//! together with post-measurement states) turns every density operator into
//! a probability vector and every measurement into a table of conditional
//! probabilities. In those terms the Born rule reads
//! `Q(E) = P(E|R) Φ P(R)`, a deformation of the law of total probability by
//! the matrix `Φ`, and unitary evolution is a special case of it.
//!
//! Modules:
//! - [`matrix`]: complex matrices, decompositions, unitarily invariant norms
//! - [`quantum`]: states, effects, POVMs, unitaries, Lüders rule
//! - [`reference`]: reference apparatuses, `Φ`, probability-form Born rule
//! - [`sic`]: Weyl–Heisenberg group, SIC verification and fiducial search
//! - [`quantumness`]: the distance `‖I − Φ‖` and its SIC minimum
//! - [`coherence`]: law-of-total-probability checks, Feynman composition,
//!   state-compatibility criteria
//! - [`wigner`]: the Wigner's-friend composite-system algebra

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherence;
pub mod error;
pub mod matrix;
pub mod probability;
pub mod quantum;
pub mod quantumness;
pub mod random;
pub mod reference;
pub mod sic;
pub mod wigner;

pub use error::{Error, Result};
pub use matrix::{hs_inner, matrix_inverse, singular_values, ui_norm, ComplexMatrix, NormSpec, DEFAULT_TOL};
pub use probability::{CondMatrix, ProbVector};
pub use quantum::{
    apply_unitary, born_operator, lueders_update, partial_trace, DensityOperator, Effect, Ket, Povm, Subsystem, Tensor,
    UnitaryMap,
};
pub use reference::{PhiMatrix, ReferenceApparatus};
