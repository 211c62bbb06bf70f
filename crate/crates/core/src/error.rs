use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distribution is not normalized (sum = {0})")]
    NotNormalized(f64),

    #[error("degenerate game: every profile maximizes the potential (gap is zero)")]
    DegenerateGame,

    #[error("game is not theorem-compatible: {0}")]
    TheoremIncompatible(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("state space of {states} profiles exceeds the cap of {cap}")]
    StateSpaceTooLarge { states: u128, cap: usize },

    #[error(
        "chain is not reversible with respect to the given distribution (max violation {0:e})"
    )]
    NotReversible(f64),

    #[error("stationary distribution has zero mass at state {0}")]
    ZeroStationaryMass(usize),

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
