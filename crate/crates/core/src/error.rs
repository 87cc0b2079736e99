use thiserror::Error;

/// Errors raised by the solver stack.
///
/// Each variant maps onto one process exit code (see [`FkError::exit_code`]);
/// the C ABI reuses the same numbers as status codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FkError {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pole of H(z) at z = {re} + {im}i (|denominator| = {modulus:e}); the contour enters the singular region")]
    Pole { re: f64, im: f64, modulus: f64 },

    #[error("infeasible contour geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("contour invalid: {0}")]
    ContourInvalid(String),

    #[error(
        "overflow: exp(z_k t) with Re(z_k) t = {exponent:.1} > 700 at node k = {node}, t = {t}; \
         use a smaller window ratio or split the time window"
    )]
    Overflow { node: usize, t: f64, exponent: f64 },

    #[error("time marching left the floating-point range at step {step} (t = {t}); the solution grows too fast for this grid")]
    NonFinite { step: usize, t: f64 },

    #[error("singular time step (det = {det:e}); use a smaller step h")]
    SingularStep { det: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl FkError {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        FkError::Domain {
            func,
            detail: detail.into(),
        }
    }

    /// Process exit code: 2 config, 3 contour, 4 singular TM step, 5 overflow, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            FkError::InvalidParameter(_) | FkError::InvalidConfig(_) => 2,
            FkError::Pole { .. } | FkError::InfeasibleGeometry(_) | FkError::ContourInvalid(_) => 3,
            FkError::SingularStep { .. } => 4,
            FkError::Overflow { .. } | FkError::NonFinite { .. } => 5,
            FkError::Domain { .. }
            | FkError::InsufficientData(_)
            | FkError::OutOfRange(_)
            | FkError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for FkError {
    fn from(e: std::io::Error) -> Self {
        FkError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FkError>;
