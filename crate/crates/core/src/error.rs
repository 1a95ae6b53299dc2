use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state or coefficient outside the admissible domain: {0}")]
    OutOfDomain(String),

    #[error("eigenvalue gap {gap:e} below tolerance")]
    NotStrictlyHyperbolic { gap: f64 },

    #[error("curve integration failed: {0}")]
    CurveIntegrationFailure(String),

    #[error("{what}: no convergence (residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },

    #[error("flux Jacobian is singular")]
    NonInvertible,

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("wave speed {speed:e} inside the resonance guard band")]
    ResonanceGuard { speed: f64 },

    #[error("coefficient approximation needs more than {cap} points")]
    CellBudgetExceeded { cap: usize },

    #[error("initial Glimm functional {upsilon:e} exceeds the budget {delta:e}")]
    DomainBudgetExceeded { upsilon: f64, delta: f64 },

    #[error("front count exceeded the cap of {cap}")]
    FrontBudgetExceeded { cap: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("at t = {time}, x = {position}, fronts {fronts:?}: {source}")]
    Event {
        time: f64,
        position: f64,
        fronts: (usize, usize),
        source: Box<Error>,
    },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
