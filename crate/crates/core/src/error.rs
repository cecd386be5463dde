use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Syntax or schema error in a plan or machine document.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("invalid machine parameters: {}", .0.join("; "))]
    InvalidMachine(Vec<String>),

    #[error("invalid motion request: {0}")]
    InvalidMotion(String),

    #[error("task `{task}` is not supported by a {machine} machine")]
    UnsupportedTask { task: String, machine: String },

    /// Geometry where a force denominator vanishes or a triangle cannot close.
    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    /// A singular-geometry failure tagged with the task and sample time that hit it.
    #[error("task #{index} `{task}` (starting at {time_s:.3} s): {source}")]
    Simulation {
        index: usize,
        task: String,
        time_s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        if err.is_io() {
            Error::Json(err)
        } else {
            Error::Parse {
                line: err.line(),
                column: err.column(),
                message: err.to_string(),
            }
        }
    }

    /// True for failures raised by the mechanics kernels.
    pub fn is_simulation(&self) -> bool {
        matches!(self, Error::SingularGeometry(_) | Error::Simulation { .. })
    }
}
