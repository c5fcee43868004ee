use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} outside [{from}, {to}]")]
    OutOfRange { t: f64, from: f64, to: f64 },

    #[error("point at distance {distance} is outside the projection tube of radius {r}")]
    OutsideTube { distance: f64, r: f64 },

    #[error("projection is multi-valued: point coincides with the excluded ball center")]
    AtSingularity,

    #[error("polytope projection did not converge within {sweeps} sweeps")]
    DidNotConverge { sweeps: usize },

    #[error("point is not a member of the set (containment defect {defect:e})")]
    NotAMember { defect: f64 },

    #[error("no member of the set found in the sampling region after {attempts} attempts")]
    EmptyIntersection { attempts: usize },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("modulus cannot certify omega(delta) < {eps} for any delta >= {smallest_delta:e}")]
    ModulusUnavailable { eps: f64, smallest_delta: f64 },

    #[error("no positive tau: omega(delta) >= {threshold} for every sampled delta > 0")]
    NoPositiveTau { threshold: f64 },

    #[error("initial point is infeasible (containment defect {defect:e})")]
    InitialInfeasible { defect: f64 },

    #[error("step {j}: distance {distance} to C(t_j) is not below r = {r}; grid too coarse")]
    TubeViolation { j: usize, distance: f64, r: f64 },

    #[error("step {j}: jump {jump} is not below eps = {eps}")]
    StepTooLarge { j: usize, jump: f64, eps: f64 },

    #[error("certification failed at step {j}: {reason}")]
    CertificationFailed { j: usize, reason: String },

    #[error("inner ball violated at t = {t}: sphere point at distance {distance:e} from C(t)")]
    InnerBallViolated { t: f64, distance: f64 },

    #[error("bound inapplicable: {0}")]
    InapplicableBound(String),

    #[error("no schedule level satisfies the smallness conditions of the cone bound")]
    NoFeasibleEps,

    #[error("schema error at {field}: {message}")]
    SchemaError { field: String, message: String },

    #[error("unknown shape tag `{0}`")]
    UnknownShapeTag(String),

    #[error("initial point infeasible: containment defect {defect:e} in C(0)")]
    InfeasibleInitialPoint { defect: f64 },

    #[error("unknown builtin scenario `{0}`")]
    UnknownBuiltin(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Strips any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Errors caused by the user's configuration rather than by the run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self.root(),
            Error::SchemaError { .. }
                | Error::UnknownShapeTag(_)
                | Error::InfeasibleInitialPoint { .. }
                | Error::UnknownBuiltin(_)
                | Error::InvalidSchedule(_)
                | Error::InvalidFamily(_)
                | Error::InvalidSet(_)
                | Error::InvalidVector(_)
                | Error::DimensionMismatch { .. }
                | Error::Io(_)
        )
    }

    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SchemaError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
