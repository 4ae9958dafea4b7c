use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model, grid or configuration value violates its basic invariants.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Inputs are well-formed but fall outside the hypothesis of the estimate
    /// or theorem being evaluated.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("not admissible: {0}")]
    Admissibility(String),

    #[error("field lives on a different grid than the operator")]
    GridMismatch,

    #[error("ratio undefined: {0} vanishes")]
    ZeroDenominator(&'static str),

    #[error("negative power of a near-singular operator (lowest eigenvalue {mu0:e})")]
    SingularPower { mu0: f64 },

    #[error("eigendecomposition failed (symmetry residual {residual:e}): {reason}")]
    Eigensolver { residual: f64, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("Picard iteration diverged; contraction ratios {ratios:?}")]
    Divergence { ratios: Vec<f64> },

    #[error("sweep member {index} ({member}) failed: {source}")]
    SweepMember {
        index: usize,
        member: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that mean "the requested regime is out of hypothesis"
    /// as opposed to malformed input or numerical breakdown.
    pub fn is_hypothesis(&self) -> bool {
        match self {
            Error::Hypothesis(_) | Error::Admissibility(_) => true,
            Error::SweepMember { source, .. } => source.is_hypothesis(),
            _ => false,
        }
    }

    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical(_)
            | Error::Divergence { .. }
            | Error::Eigensolver { .. }
            | Error::SingularPower { .. } => true,
            Error::SweepMember { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
