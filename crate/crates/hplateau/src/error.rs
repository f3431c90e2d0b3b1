use thiserror::Error;

/// Errors surfaced by mesh validation, energy evaluation, and the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate triangle {index} (area {area:.3e} below tolerance {tol:.3e})")]
    DegenerateTriangle { index: usize, area: f64, tol: f64 },

    #[error("surface is not watertight: {count} unmatched edges, first few: {sample:?}")]
    NotWatertight {
        count: usize,
        sample: Vec<(usize, usize)>,
    },

    #[error("H = {h} outside the feasible range [{lo}, {hi}) for this domain")]
    InfeasibleH { h: f64, lo: f64, hi: f64 },

    #[error("operation requires the Euclidean metric: {0}")]
    UnsupportedMetric(String),

    #[error("degenerate reference triangle {0} in map")]
    DegenerateReference(usize),

    #[error("zero mixed area at vertex {0}")]
    ZeroMixedArea(usize),

    #[error("loops not image-matched within {tol:.3e} (best alignment leaves gap {gap:.3e})")]
    LoopMismatch { tol: f64, gap: f64 },

    #[error("fold not smoothable")]
    FoldNotSmoothable,

    #[error("{0}")]
    Invalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
