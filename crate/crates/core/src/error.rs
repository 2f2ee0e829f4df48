use thiserror::Error;

/// Errors reported by constructions and verifiers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("map is not injective: {0}")]
    NotInjective(&'static str),

    #[error("map is not equivariant: {0}")]
    NotEquivariant(&'static str),

    #[error("square does not commute: {0}")]
    NotCommuting(&'static str),

    #[error("subspace is not invariant under the action: {0}")]
    NotInvariant(&'static str),

    #[error("spectrum is not contained in powers of two: eigenvalue defect at weight {0}")]
    NotAHomogeneity(u32),

    #[error("projections do not form a complete orthogonal idempotent family: {0}")]
    BadProjections(&'static str),

    #[error("vb-object condition ({condition}) violated: {detail}")]
    VbObject {
        condition: &'static str,
        detail: &'static str,
    },

    #[error("embedding is not wide: {0}")]
    NotWide(&'static str),

    #[error("map does not preserve the quotient subspaces: {0}")]
    QuotientIncompatible(&'static str),

    #[error("matrix is singular")]
    Singular,

    #[error("linear system has no solution: {0}")]
    Unsolvable(&'static str),

    #[error("infeasible dimension bounds: {0}")]
    InfeasibleBounds(String),

    #[error("retry cap exceeded after {0} attempts")]
    RetryCap(usize),

    #[error("point arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("polynomial square does not commute as polynomial identities")]
    PolySquare,

    #[error("immersion failure: Jacobian of {0} is not injective at the base point")]
    ImmersionFailure(&'static str),

    #[error("unknown lemma name: {0}")]
    UnknownLemma(String),

    #[error("squares are not composable: {0}")]
    NotComposable(&'static str),

    #[error("input square is not regular")]
    NotRegular,

    #[error("parse error: {0}")]
    Parse(String),
}
