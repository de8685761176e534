use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("shape error in {context}: {detail}")]
    Shape { context: &'static str, detail: String },

    /// A constructor rejected its input; `predicate` names the violated
    /// invariant and `magnitude` how badly it was violated.
    #[error("invalid {kind}: {predicate} violated (magnitude {magnitude:.3e})")]
    InvalidObject {
        kind: &'static str,
        predicate: &'static str,
        magnitude: f64,
    },

    #[error("invalid norm specification: {0}")]
    InvalidNorm(String),

    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:.3e}, bound {bound:.3e})")]
    IllConditioned { condition: f64, bound: f64 },

    #[error("expected a real matrix, imaginary residue {magnitude:.3e}")]
    ImaginaryResidue { magnitude: f64 },

    #[error(
        "probabilities not quantum-consistent for this reference: \
         min eigenvalue {min_eigenvalue:.3e}, trace error {trace_error:.3e}"
    )]
    NotQuantumConsistent { min_eigenvalue: f64, trace_error: f64 },

    #[error("normative violation: entry {index} = {value:.6e} lies outside [0, 1]")]
    NormativeViolation { index: usize, value: f64 },

    #[error("outcome has probability {probability:.3e}, cannot condition on it")]
    ZeroProbability { probability: f64 },

    #[error("wrong number of effects: expected {expected}, found {found}")]
    WrongEffectCount { expected: usize, found: usize },

    #[error("fiducial orbit is not a SIC (max deviation {deviation:.3e})")]
    NotSic { deviation: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("probability book has no marginal claim to check")]
    MissingMarginal,

    #[error("parse error: {0}")]
    Parse(String),
}
