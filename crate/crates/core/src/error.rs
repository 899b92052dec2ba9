use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter is outside its allowed range.
    InvalidParameter { name: &'static str, value: f64 },
    /// The shifted QR iteration did not deflate the eigenvalue at `index`.
    NoConvergence { index: usize, iterations: usize },
    /// The lower normal-mode frequency squared is negative: the drive exceeds
    /// the static stability limit.
    StaticInstability { omega_minus_sq: f64 },
    /// The drift matrix has an eigenvalue with non-negative real part.
    DynamicInstability { growth_rate: f64 },
    /// The quadratic-form matrix is not positive definite.
    NotPositiveDefinite,
    /// A linear solve hit an exactly singular pivot.
    SingularMatrix,
    /// Frequency grid is empty, reversed, or otherwise unusable.
    InvalidGrid,
    /// A level cap was exceeded.
    CapExceeded { requested: usize, cap: usize },
    /// Too few samples for the requested number of fit parameters.
    WindowTooSmall { samples: usize, required: usize },
    /// All samples in the fit window are equal.
    DegenerateWindow,
    /// All three thermal-spectrum parameters requested from too few samples.
    Unidentifiable { samples: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name} = {value}")
            }
            Error::NoConvergence { index, iterations } => write!(
                f,
                "eigenvalue iteration did not converge for eigenvalue {index} after {iterations} iterations"
            ),
            Error::StaticInstability { omega_minus_sq } => write!(
                f,
                "static instability: lower normal-mode frequency squared is {omega_minus_sq:e} (rad/s)^2"
            ),
            Error::DynamicInstability { growth_rate } => write!(
                f,
                "dynamical instability: drift eigenvalue with growth rate {growth_rate:e} rad/s"
            ),
            Error::NotPositiveDefinite => write!(f, "quadratic form is not positive definite"),
            Error::SingularMatrix => write!(f, "singular matrix in linear solve"),
            Error::InvalidGrid => write!(f, "invalid frequency grid"),
            Error::CapExceeded { requested, cap } => {
                write!(f, "requested level count {requested} exceeds cap {cap}")
            }
            Error::WindowTooSmall { samples, required } => write!(
                f,
                "fit window has {samples} samples, at least {required} required"
            ),
            Error::DegenerateWindow => write!(f, "fit window is constant"),
            Error::Unidentifiable { samples } => write!(
                f,
                "mass, frequency and damping cannot all be fitted from {samples} samples"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
