use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian: max |M - M^dag| = {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("state is not normalised: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate site {0} in operator string")]
    DuplicateSite(usize),

    #[error("site {site} out of range for {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("degenerate levels: gap {gap:.3e} below tolerance")]
    Degenerate { gap: f64 },

    #[error("meter operators do not commute: ||[X_M, H_M]|| = {norm:.3e}")]
    NonCommutingMeter { norm: f64 },

    #[error("setup error: {0}")]
    Setup(String),

    #[error("initial system-meter state is not a product state (deviation {deviation:.3e})")]
    NotProductState { deviation: f64 },

    #[error("all matrix elements of dH/ds out of the ground state vanish")]
    VanishingMatrixElement,

    #[error("time-to-solution undefined: every duration has negligible success probability")]
    TtsUndefined,

    #[error("problem file: {0}")]
    ProblemFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
