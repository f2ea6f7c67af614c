use thiserror::Error;

/// Errors raised by the percolation laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(u64, u64),

    #[error("cluster exceeded the cap of {cap} vertices")]
    ClusterCap { cap: usize },

    #[error("graph volume {volume} exceeds the materialization cap {cap}")]
    VolumeCap { volume: u64, cap: u64 },

    #[error("branching process progeny exceeded the cap of {cap}")]
    ProgenyCap { cap: usize },

    #[error("iteration cap of {cap} reached: {what}")]
    IterationCap { cap: usize, what: String },

    #[error("no solution: {0}")]
    NoSolution(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by a resource cap rather than bad input.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::ClusterCap { .. }
                | Error::VolumeCap { .. }
                | Error::ProgenyCap { .. }
                | Error::IterationCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
