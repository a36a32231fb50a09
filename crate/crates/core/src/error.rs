use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient points: requested {requested}, available {available}")]
    InsufficientPoints { requested: usize, available: usize },

    #[error("target not found: instance {0}")]
    TargetNotFound(u32),

    #[error("instance {0} not present in point cloud")]
    InstanceAbsent(u32),

    #[error("asset `{0}` has no stable poses")]
    NoStablePoses(String),

    #[error("placement failed after {0} attempts")]
    PlacementFailed(usize),

    #[error("workspace saturated: accepted {accepted} of {requested} free-space grasps within {budget} samples")]
    WorkspaceSaturated {
        requested: usize,
        accepted: usize,
        budget: usize,
    },

    #[error("point cloud has no surface normals")]
    MissingNormals,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("unknown variant `{0}`")]
    UnknownVariant(String),

    #[error("unknown scorer `{0}`")]
    UnknownScorer(String),

    #[error("target {target} still blocked after {removals} removals")]
    StillBlocked { target: u32, removals: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
