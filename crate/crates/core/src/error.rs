use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Agent and target (nearly) coincide; the bearing is undefined.
    #[error("degenerate geometry: agent-target distance {distance:e} m")]
    DegenerateGeometry { distance: f64 },

    #[error("non-finite {quantity} at t = {t} s")]
    NonFinite { t: f64, quantity: &'static str },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("scenario parse error: {0}")]
    ScenarioParse(#[from] toml::de::Error),

    #[error("empty time series")]
    EmptySeries,

    #[error("window [{start}, {end}] s outside trajectory span [{first}, {last}] s")]
    WindowOutOfRange {
        start: f64,
        end: f64,
        first: f64,
        last: f64,
    },

    #[error("trajectory file: {0}")]
    TrajectoryFormat(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidScenario(msg.into())
    }
}
