use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("atomic amplitudes are not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
    #[error("electron offset {offset} outside the truncated ladder [-{cut}, {cut}]")]
    OffsetOutOfRange { offset: i64, cut: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystem(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("time {t} outside the interaction window [0, {window}]")]
    TimeOutOfWindow { t: f64, window: f64 },
    #[error("norm drift {drift:e} exceeds the allowed {allowed:e}")]
    NormDrift { drift: f64, allowed: f64 },
    #[error("step halving did not reach tolerance {tolerance:e} (last difference {difference:e})")]
    NoConvergence { tolerance: f64, difference: f64 },
    #[error("heralding probability {0:e} is below the accessibility threshold")]
    DegenerateHerald(f64),
    #[error("truncation edge population {population:e} exceeds {limit:e}; raise the sideband cut")]
    TruncationEdge { population: f64, limit: f64 },
    #[error("population outside the {{0,+}} manifold is {0:e}")]
    OutOfManifold(f64),
    #[error("state too large to expand densely ({0} amplitudes)")]
    TooLarge(usize),
    #[error("scan point {index} (parameter {value}) failed: {source}")]
    ScanPoint {
        index: usize,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
