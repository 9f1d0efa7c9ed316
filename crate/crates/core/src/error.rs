use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown curve `{0}` (expected sphere, ellipsoid, starfish, droplet)")]
    UnknownCurve(String),

    #[error("invalid curve definition: {0}")]
    InvalidCurve(String),

    #[error("parameter t = {t} is a corner; evaluate one-sided instead")]
    AtCorner { t: f64 },

    #[error("degenerate frame at t = {t}: ds/dt = {jac:e}")]
    DegenerateFrame { t: f64, jac: f64 },

    #[error("invalid mesh request: {0}")]
    InvalidMesh(String),

    #[error("target and source coincide (rho = 0)")]
    CoincidentPoints,

    #[error("adaptive quadrature did not converge (depth cap {depth}, estimate {estimate:e})")]
    QuadratureNotConverged { depth: u32, estimate: f64 },

    #[error("incident field does not decay below {threshold:e} by mode {m_cap} (achieved {achieved:e})")]
    ModeCapReached { threshold: f64, m_cap: usize, achieved: f64 },

    #[error("singular system for mode {mode}: pivot {pivot:e} at column {column}")]
    SingularMatrix { mode: i64, column: usize, pivot: f64 },

    #[error("mode {mode}: backward error {error:e} exceeds {tol:e}")]
    InaccurateSolve { mode: i64, error: f64, tol: f64 },

    #[error("mode {mode}: {source}")]
    Mode {
        mode: i64,
        #[source]
        source: Box<Error>,
    },

    #[error("evaluation point {0:?} is not in the exterior domain")]
    NotExterior([f64; 3]),

    #[error("undersampled synthesis: {samples} samples for max mode {m_max}")]
    Undersampled { samples: usize, m_max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("expression error at column {column}: {message}")]
    Expression { column: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code used by the command line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownCurve(_)
            | Error::InvalidCurve(_)
            | Error::InvalidMesh(_)
            | Error::InvalidArgument(_)
            | Error::Config(_)
            | Error::Expression { .. }
            | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
