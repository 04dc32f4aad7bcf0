use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate measure: {0}")]
    DegenerateMeasure(String),

    #[error("degenerate operator: alpha = 0 with empty measure")]
    DegenerateOperator,

    #[error("assembly failed to converge within tolerance on element pair ({pair_a}, {pair_b}): last increment {increment:e}")]
    Assembly {
        pair_a: usize,
        pair_b: usize,
        increment: f64,
    },

    #[error("extension undefined: mu is the zero measure")]
    UndefinedExtension,

    #[error("eigensolver error: {0}")]
    Eigen(String),

    #[error("splitting index {index} cuts an eigenvalue cluster (lambda_{index} and lambda_{next} within {gap:e} relative)", next = index + 1)]
    ClusterCut { index: usize, gap: f64 },

    #[error("geometry not certified: {0}")]
    GeometryNotCertified(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("degenerate path: mountain-pass path collapsed to zero")]
    DegeneratePath,

    #[error("singular Hessian (condition estimate {cond:e})")]
    SingularHessian { cond: f64 },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
