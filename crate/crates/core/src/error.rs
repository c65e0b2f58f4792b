use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid code spec: {0}")]
    InvalidSpec(String),

    #[error("physical map has {got} entries, layout needs {expected}")]
    MapSizeMismatch { expected: usize, got: usize },

    #[error("physical map assigns qubit {0} twice")]
    DuplicatePhysicalQubit(usize),

    #[error("layout edge ({0}, {1}) is not in the device coupling map")]
    MissingAdjacency(usize, usize),

    #[error("calibration schema: {0}")]
    Schema(String),

    #[error("calibration value `{field}` for {entity} is {value}, outside {range}")]
    OutOfRange {
        field: &'static str,
        entity: String,
        value: f64,
        range: &'static str,
    },

    #[error("no calibration entry for qubit {0}")]
    MissingQubit(usize),

    #[error("no calibration entry for edge ({0}, {1})")]
    MissingEdge(usize, usize),

    #[error("measurement record {0} is not deterministic in the noiseless circuit")]
    NondeterministicRecord(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(
        "fault {fault} at {location} fires {detectors:?} and cannot be decomposed into graph edges"
    )]
    Undecomposable {
        fault: usize,
        location: String,
        detectors: Vec<usize>,
    },

    #[error("fault {fault} at {location} flips a logical observable without firing any detector")]
    SilentLogical { fault: usize, location: String },

    #[error("defect {0} has no path to another defect or the boundary")]
    DisconnectedDefect(usize),

    #[error("too many defects for brute force: {0} (limit {1})")]
    TooManyDefects(usize, usize),

    #[error("analysis: {0}")]
    Analysis(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("bad detection file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
