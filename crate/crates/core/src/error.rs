use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("photon sets differ: {left:?} vs {right:?}")]
    PhotonSetMismatch { left: Vec<u8>, right: Vec<u8> },

    #[error("photon sets overlap on photon {0}")]
    PhotonSetOverlap(u8),

    #[error("photon {0} is not part of the state")]
    PhotonAbsent(u8),

    #[error("cannot normalize a state with squared norm {0:e}")]
    ZeroNorm(f64),

    #[error("invalid basis label: {0}")]
    InvalidLabel(String),

    #[error("non-finite amplitude on {0}")]
    NonFinite(String),

    #[error("channel {0} outside 1..=10")]
    InvalidChannel(u8),

    #[error("channel {channel} is not a port of element {element}")]
    ChannelNotOnElement { channel: u8, element: String },

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("second-layer rules are undefined on collision label {0}")]
    CollisionLabel(String),

    #[error("photon {0} is not one of the analysed photons 1, 3, 5")]
    NotAnalysedPhoton(u8),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("delta {0} outside [0, 1/2]")]
    DeltaOutOfRange(f64),

    #[error("overlapping ports within layer {layer}: channel {channel}")]
    OverlappingPorts { layer: u8, channel: u8 },

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
