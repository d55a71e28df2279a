use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("metric is degenerate at {x:?} (smallest |eigenvalue| {min_abs_eigenvalue:e})")]
    DegenerateMetric { x: Vec<f64>, min_abs_eigenvalue: f64 },
    #[error("metric at {x:?} has signature ({found_p},{found_q}), expected ({expected_p},{expected_q})")]
    SignatureMismatch {
        x: Vec<f64>,
        expected_p: usize,
        expected_q: usize,
        found_p: usize,
        found_q: usize,
    },
    #[error("{what}: expected length {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("Schouten tensor undefined for dimension {dim} < 3")]
    SchoutenUndefined { dim: usize },
    #[error("velocity is null (|g(v,v)| = {norm:e})")]
    NullVelocity { norm: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("right-hand side failed at t = {t}: {source}")]
    Integration {
        t: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("step-doubling error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    StepTooCoarse { estimate: f64, tolerance: f64 },
}

impl Error {
    pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { what, expected, actual })
        }
    }
}
