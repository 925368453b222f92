use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("tangent is not a unit vector (max deviation {deviation:.3e}); \
             the trajectory leaks out of the two-level subspace")]
    NonUnitTangent { deviation: f64 },

    #[error("curve is not regular at lambda = {lambda} (speed {speed:.3e})")]
    NonRegularCurve { lambda: f64, speed: f64 },

    #[error("frame discontinuity at t = {t}: jump {jump:.3e} exceeds bound {bound:.3e}")]
    FrameDiscontinuity { t: f64, jump: f64, bound: f64 },

    #[error("pulse/trajectory mismatch: ||dT/dt - kappa N|| = {deviation:.3e}")]
    FrameMismatch { deviation: f64 },

    #[error("no sign change of the net area in beta bracket [{lo}, {hi}]; widen the bracket")]
    NoBracket { lo: f64, hi: f64 },

    #[error("unknown curve name {0:?}")]
    UnknownCurve(String),

    #[error("unknown pulse name {0:?}")]
    UnknownPulse(String),

    #[error("Magnus order {0} unsupported (max 4)")]
    UnsupportedMagnusOrder(usize),

    #[error("eigenvalue labeling ambiguous near avoided crossing at g = {g}; use smaller g steps")]
    LabelingAmbiguity { g: f64 },

    #[error("pulse file error: {0}")]
    PulseFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
