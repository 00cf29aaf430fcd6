use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("window too short: truncation index {n} < {min}")]
    WindowTooShort { n: u64, min: u64 },
    #[error("no net entries inside the window ending at {end}")]
    EmptyWindow { end: u64 },
    #[error("index sets differ: {0}")]
    IndexMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("derivative oracle failed at order {alpha}, x = {x}")]
    OracleGap { alpha: usize, x: f64 },
    #[error("no decay certificate covers the grid: {0}")]
    TailUnbounded(String),
    #[error("truncation not certified: {0}")]
    TruncationUncertified(String),
    #[error("Richardson pair disagrees: {0}")]
    QuadratureDivergence(String),
    #[error("series route limited to n <= {cap}, got {n}")]
    SeriesOverflow { n: u32, cap: u32 },
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("Newton iteration stalled after {iterations} steps (residual {residual:e})")]
    NewtonStall { iterations: usize, residual: f64 },
    #[error("coefficient tail not certified at radius {lambda}")]
    TailUncertified { lambda: f64 },
    #[error("projection cutoff {cutoff} exceeds stored order {k}")]
    TruncationExceedsK { cutoff: u64, k: u64 },
    #[error("growth not certified: {0}")]
    GrowthUncertified(String),
    #[error("cache entry corrupt: {0}")]
    CacheCorrupt(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
