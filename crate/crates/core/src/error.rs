use thiserror::Error;

/// Errors produced by graph loading, validation and the analysis passes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("edge list contains no nodes")]
    EmptyGraph,

    #[error("node id {0} out of range for graph with {1} nodes")]
    NodeOutOfRange(usize, usize),

    #[error("node set is empty")]
    EmptySet,

    #[error("exact cut enumeration limited to {max} members, set has {size}")]
    SetTooLarge { size: usize, max: usize },

    #[error("need at least two communities, got {0}")]
    TooFewCommunities(usize),

    #[error("perturbation intensity must lie in (0, 1], got {0}")]
    BadIntensity(f64),

    #[error("perturbation needs at least one trial")]
    NoTrials,

    #[error("teleport probability must lie in (0, 1), got {0}")]
    BadTeleport(f64),

    #[error("push tolerance must be positive, got {0}")]
    BadEpsilon(f64),

    #[error("confirmation factor must exceed 1, got {0}")]
    BadConfirmation(f64),

    #[error("curves disagree on their prefix grid")]
    GridMismatch,

    #[error("unknown score token `{0}`")]
    UnknownScore(String),

    #[error("unknown goodness token `{0}`")]
    UnknownGoodness(String),

    #[error("unknown strategy token `{0}`")]
    UnknownStrategy(String),

    #[error("invalid synthesis parameters: {0}")]
    BadSynthesis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
