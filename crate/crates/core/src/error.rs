use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("sites {0} and {1} are not nearest neighbours")]
    NotNearestNeighbour(usize, usize),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("configuration has {got} sites, lattice has {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("field configuration is not divergence free at {} dual vertices", .0.len())]
    NotDivergenceFree(Vec<usize>),

    #[error("inconsistent height field around plaquette {0}")]
    InconsistentHeight(usize),

    #[error("flux density {f} is not reachable on Lx = {lx}: {reason}")]
    UnreachableSector { f: f64, lx: usize, reason: String },

    #[error("invalid run parameters: {0}")]
    InvalidRun(String),

    #[error("imaginary time {0} outside [0, beta]")]
    TauOutOfRange(f64),

    #[error("system too large for exact diagonalization: {0} sites (max {1})")]
    TooLarge(usize, usize),

    #[error("analytic continuation: {0}")]
    Sac(String),

    #[error("analysis: {0}")]
    Analysis(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
