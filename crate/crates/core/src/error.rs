use std::path::PathBuf;

use crate::integrator::State;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid PES parameters: {0}")]
    InvalidSpec(String),

    #[error("coefficient system singular (pivot {pivot:e})")]
    SingularSystem { pivot: f64 },

    #[error("VRI not bracketed on ({lo}, {hi})")]
    VriNotBracketed { lo: f64, hi: f64 },

    #[error("Newton iteration did not converge from seed ({seed_x}, {seed_y})")]
    NewtonDiverged { seed_x: f64, seed_y: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration stalled at t = {} with step {step:e}", .state.t)]
    Stalled { state: State, step: f64 },

    #[error("non-finite state reached at t = {}", .state.t)]
    NonFinite { state: State },

    #[error("trajectory {traj_id}: {source}")]
    Trajectory {
        traj_id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("fate map has no accessible cells")]
    NoAccessibleCells,

    #[error("least-squares design is rank deficient")]
    RankDeficient,

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
