use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tolerance: need 0 < solver_eps ({solver_eps}) < dist_eq ({dist_eq}) < 1e-3")]
    InvalidTolerance { dist_eq: f64, solver_eps: f64 },

    #[error("chain cannot reach: chord {chord} exceeds total hop length {reach}")]
    ChainCannotReach { chord: f64, reach: f64 },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("agent {agent} is not a member of room {room:?}")]
    NotInRoom { agent: usize, room: Vec<usize> },

    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),

    #[error("enumeration needs {needed} agents but the cap is {cap}")]
    CapExceeded { needed: usize, cap: usize },

    #[error("invalid X3C instance: {0}")]
    InvalidInstance(String),

    #[error("invalid drawing: {0}")]
    InvalidDrawing(String),

    #[error("no orthogonal drawing found up to grid {width}x{height}")]
    DrawingSearchExhausted { width: i64, height: i64 },

    #[error("construction: {0}")]
    Construction(String),

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error("outcome template produced an invalid partition: {0}")]
    TemplateBroken(String),

    #[error("all-best outcome matches neither template: {0}")]
    Unclassifiable(String),

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
