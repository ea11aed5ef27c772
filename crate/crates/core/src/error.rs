use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid size {0}: need a power of two >= 8")]
    InvalidGrid(usize),
    #[error("field contains non-finite samples")]
    NonFiniteSamples,
    #[error("grid mismatch: {0} vs {1} points")]
    GridMismatch(usize, usize),
    #[error("mean {mean:e} exceeds tolerance {tol:e}; the inverse derivative is ill-posed")]
    NonZeroMean { mean: f64, tol: f64 },
    #[error("degenerate inertia (alpha = 0): mean {mean:e} lies outside the image")]
    DegenerateOutsideImage { mean: f64 },
    #[error("inertia operator is singular (symbol vanishes at wavenumber {0})")]
    SingularInertia(i64),
    #[error("degenerate inertia (alpha = 0): use the Hunter-Saxton path")]
    DegenerateInertia,
    #[error("gauge violation: mean(v) = {0:e} must vanish")]
    GaugeViolation(f64),
    #[error("not an orientation-preserving diffeomorphism: {0}")]
    NotADiffeo(String),
    #[error("density must be positive for the square-root Casimir (min = {0:e})")]
    NotPositive(f64),
    #[error("state became non-finite or exceeded the blow-up threshold at t = {t}")]
    NonFinite { t: f64 },
    #[error("cocentral value a = 0 is not a Hill operator; use the square-root Casimir")]
    ZeroCocentral,
    #[error("ODE integrator failed: {0}")]
    IntegratorFailure(String),
    #[error("monodromy trace {0} is not positive; log-trace Casimir undefined")]
    NonPositiveTrace(f64),
    #[error("solution ratio has a critical point (eta' = {0:e})")]
    CriticalRatio(f64),
    #[error("functional `{0}` has no analytic variational derivative")]
    NoAnalyticDerivative(String),
    #[error("unsupported index {0}")]
    UnsupportedIndex(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
