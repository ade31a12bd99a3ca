use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("receive element {rx} and transmit element {tx} coincide")]
    CoincidentElements { rx: usize, tx: usize },

    #[error("scatterer {0} coincides with an array element")]
    ScattererCoincident(usize),

    #[error("scene has no scatterer set")]
    NoScatterers,

    #[error("scatterer set is empty")]
    EmptyScatterers,

    #[error("channel matrix is identically zero")]
    ZeroChannel,

    #[error("channel capacity is zero; relative error undefined")]
    ZeroCapacity,

    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error(
        "closed-form fit diverged: aux = {aux}, max relative deviation {max_relative_deviation:.3}"
    )]
    FitDiverged {
        aux: f64,
        max_relative_deviation: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
