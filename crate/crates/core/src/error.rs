//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spherical harmonic indices: l={l}, m={m}")]
    InvalidDegreeOrder { l: usize, m: i64 },

    #[error("colatitude {theta} outside [0, pi]")]
    InvalidColatitude { theta: f64 },

    #[error("longitude {phi} is not finite")]
    InvalidLongitude { phi: f64 },

    #[error("matrix is not a rotation (orthogonality/determinant defect {defect:.3e})")]
    NotARotation { defect: f64 },

    #[error("transform bandlimit {requested} exceeds grid bandlimit {grid}")]
    BandlimitExceedsGrid { requested: usize, grid: usize },

    #[error("cutoff degree {l_cut} exceeds coefficient bandlimit {l_max}")]
    CutoffExceedsBandlimit { l_cut: usize, l_max: usize },

    #[error("working bandlimit {l_work} below monomial degree {l}")]
    WorkOrderTooSmall { l: usize, l_work: usize },

    #[error("field/grid size mismatch: grid has {expected} nodes, got {got} values")]
    GridSizeMismatch { expected: usize, got: usize },

    #[error("herglotz atom overflow in {context}: real exponent {exponent:.2} exceeds {limit}")]
    AtomOverflow {
        context: String,
        exponent: f64,
        limit: f64,
    },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("non-finite gradient in parameter block `{block}`")]
    NonFiniteGradient { block: String },

    #[error("training failed at epoch {epoch}, batch {batch}: {source}")]
    Training {
        epoch: usize,
        batch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("targets are constant: standard deviation is zero")]
    ConstantTargets,

    #[error("need at least 2 samples, got {got}")]
    TooFewSamples { got: usize },

    #[error("training targets must be real (max |imag| = {max_imag:.3e})")]
    ComplexTargets { max_imag: f64 },

    #[error("reference field has zero energy")]
    ZeroEnergyReference,

    #[error("colatitude {theta} is within {margin:.1e} of a pole")]
    PoleProximity { theta: f64, margin: f64 },

    #[error("grids differ: {context}")]
    GridMismatch { context: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error("empty batch")]
    EmptyBatch,

    #[error("{path}:{line}: {msg}")]
    Format {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid model configuration: {0}")]
    BadConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
