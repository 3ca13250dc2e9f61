use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation at line {line}: {msg}")]
    Schema { line: usize, msg: String },
    #[error("timestamps not strictly increasing at sample {index}")]
    NonMonotoneTime { index: usize },
    #[error("negative force {value} at sample {index}")]
    NegativeForce { index: usize, value: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rank-deficient sample set: {0}")]
    RankDeficient(String),
    #[error("solver did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("tick mismatch: plan dt {plan_dt} s, simulator dt {sim_dt} s")]
    TickMismatch { plan_dt: f64, sim_dt: f64 },
    #[error("no sustain phase in either input")]
    NoSustain,
    #[error("config error: {0}")]
    Config(String),
    #[error("model file error: {0}")]
    ModelFile(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
