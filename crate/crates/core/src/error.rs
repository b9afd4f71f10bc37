use rug::Rational;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("division by a series with zero leading coefficient")]
    ZeroLeadingCoefficient,
    #[error("lead exponents {0} and {1} differ by a non-integer")]
    IncompatibleExponents(Rational, Rational),
    #[error("unregistered Lambert pattern: {0}")]
    UnknownPattern(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("source polynomial has degree {rhs_degree}, operator degree is {degree}")]
    SourceDegree { rhs_degree: usize, degree: usize },
    #[error("recurrence leading coefficient vanishes at index {0}")]
    SingularRecurrence(usize),
    #[error("theta_q t has zero leading coefficient")]
    DegenerateUniformizer,
    #[error("integrand has nonzero constant term {0}")]
    NonzeroConstantTerm(Rational),
    #[error("point is not in the upper half-plane")]
    NotInUpperHalfPlane,
    #[error("coefficient stream exhausted: need {needed} terms, have {available}")]
    StreamExhausted { needed: usize, available: usize },
    #[error("coefficient overflow at index {0}")]
    CoefficientOverflow(usize),
    #[error("argument must satisfy |x| < 1")]
    OutsideUnitDisc,
    #[error("functional equation residual {residual:e} exceeds tolerance {tolerance:e}")]
    FunctionalEquation { residual: f64, tolerance: f64 },
    #[error("no root of unity of order dividing 24 within {distance:e} of the detected value")]
    RootNumber { distance: f64 },
    #[error("extrapolation did not converge (successive estimates differ by {0:e})")]
    NonConvergent(f64),
    #[error("matrix {0:?} is not a parabolic element of SL(2,Z) with c > 0")]
    NotParabolic([i64; 4]),
    #[error("cusp {alpha} is not fixed by {gamma:?}")]
    NotFixed { alpha: Rational, gamma: [i64; 4] },
    #[error("a_n vanished at n = {0}")]
    ZeroDenominator(usize),
    #[error("unknown case id {0:?}")]
    UnknownCase(String),
    #[error("registry: {0}")]
    Registry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
