use thiserror::Error;

/// Errors raised by the planning core.
///
/// Most of these indicate a caller bug (bad configuration, a terminal state
/// handed to the generative model) rather than a recoverable condition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("generative model called on a terminal state")]
    TerminalState,

    #[error("particle belief must hold at least one particle")]
    EmptyBelief,

    #[error("particle and weight lists differ in length ({particles} vs {weights})")]
    LengthMismatch { particles: usize, weights: usize },

    #[error("invalid weight {0}: weights must be finite and nonnegative")]
    InvalidWeight(f64),

    #[error("all particle weights are zero")]
    ParticleDepletion,

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("cost vector has {got} entries, model declares {expected}")]
    CostDimension { expected: usize, got: usize },

    #[error("node has no child actions")]
    NoChildren,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,
}
