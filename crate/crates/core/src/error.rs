use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFiniteValue(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("singular metric: {0}")]
    SingularMetric(String),
    #[error("branch undefined: {0}")]
    BranchUndefined(String),
    #[error("no real root of the quartic at u = {u}")]
    NoRealRoot { u: f64 },
    #[error("quadrature failed to reach tolerance {tol:e} (estimate {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },
    #[error("metric is not projectively flat in this chart (residual {residual:e})")]
    NotProjectivelyFlat { residual: f64 },
    #[error("degenerate flag: y and u are (nearly) parallel")]
    DegenerateFlag,
    #[error("direction too close to the singular directions +-b (s = {s}, b = {b})")]
    SingularDirection { s: f64, b: f64 },
    #[error("unsupported signature: {0}")]
    UnsupportedSignature(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("expression error: {0}")]
    Expr(String),
}

pub type Result<T> = std::result::Result<T, Error>;
