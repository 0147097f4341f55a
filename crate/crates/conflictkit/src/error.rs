use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the
/// individual stages so callers can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Format {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("backend failure: {0}")]
    BackendFailure(String),

    #[error("could not extract an answer span or code block: {0}")]
    ExtractionFailure(String),

    #[error("conflicting entity equals the parametric answer: {0}")]
    ConflictDegenerate(String),

    #[error("no deprecation target available: {0}")]
    NoTargetAvailable(String),

    #[error("not enough distinct conflict entities: {0}")]
    InsufficientEntities(String),

    #[error("code does not parse, mutation refused: {0}")]
    MutationParse(String),

    #[error("sandbox unavailable: {0}")]
    SandboxUnavailable(String),

    #[error("pk and ck answers coincide after normalization: {0}")]
    DegenerateLabels(String),

    #[error("layer {layer} out of range for backend with {n_layers} layers")]
    LayerOutOfRange { layer: usize, n_layers: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("activation matrices come from different layers: {a} vs {b}")]
    LayerMismatch { a: usize, b: usize },

    #[error("attention maps unavailable: {0}")]
    AttentionUnavailable(String),

    #[error("unknown backend kind: {0}")]
    UnknownBackend(String),

    #[error("records and activations do not align: {0}")]
    Alignment(String),

    #[error("probe dataset has a single class: {0}")]
    SingleClass(String),

    #[error("too few samples: {0}")]
    TooFewSamples(String),

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("probe weight vector has zero norm")]
    ZeroTheta,

    #[error("required stage has not completed: {0}")]
    MissingStage(String),

    #[error("adapter protocol error: {0}")]
    Adapter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
