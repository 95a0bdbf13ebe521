use thiserror::Error;

/// Errors produced by layout construction, state/operator algebra and the
/// protocol pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("layout has no modes")]
    EmptyLayout,

    #[error("mode {mode} has dimension 0; every mode needs at least one level")]
    ZeroDim { mode: usize },

    #[error("total dimension {total} exceeds the amplitude cap {cap}")]
    DimensionCap { total: usize, cap: usize },

    #[error("dense matrix of dimension {total} exceeds the dense cap {cap}")]
    DenseCap { total: usize, cap: usize },

    #[error("mode index {mode} out of range ({count} modes)")]
    InvalidMode { mode: usize, count: usize },

    #[error("occupation {occ} out of range for mode {mode} (dimension {dim})")]
    OccupationOutOfRange { mode: usize, occ: usize, dim: usize },

    #[error("operands live on different layouts")]
    LayoutMismatch,

    #[error("state norm {norm:e} below epsilon; cannot normalize")]
    ZeroNorm { norm: f64 },

    #[error("loss event is impossible on this state (zero post-loss norm)")]
    ImpossibleEvent,

    #[error(
        "truncation inadequate on mode {mode}: squeeze r={r:.3} needs roughly \
         {required:.0} levels, mode has {dim}"
    )]
    TruncationInadequate {
        mode: usize,
        r: f64,
        required: f64,
        dim: usize,
    },

    #[error("coupling entry gamma[{i}][{j}] = {value} is not binary (parity coding needs 0 or 1)")]
    NonBinaryCoupling { i: usize, j: usize, value: f64 },

    #[error("coding scheme mismatch: expected {expected}")]
    SchemeMismatch { expected: &'static str },

    #[error("parity coding needs a strength value")]
    MissingStrength,

    #[error("loss weights invalid: {reason}")]
    InvalidWeights { reason: String },

    #[error("loss operator requested for an event of kind none")]
    NoLossEvent,

    #[error("measurement branch has probability {probability:e}; nothing to project onto")]
    ZeroProbabilityBranch { probability: f64 },

    #[error("recovery is not defined for this coding scheme")]
    UnsupportedRecovery,

    #[error("photon statistics overflow guard: |r| = {r} exceeds {max}")]
    PmfOverflow { r: f64, max: f64 },

    #[error("operator representation does not support this operation: {what}")]
    Unsupported { what: &'static str },

    #[error("scenario field `{field}`: {reason}")]
    Scenario { field: String, reason: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn scenario(field: &str, reason: impl Into<String>) -> Self {
        Error::Scenario {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
