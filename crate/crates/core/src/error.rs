use core::fmt;

/// Failure modes of the numerical pipelines.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Division by zero, square root of a non-positive value, or a non-finite
    /// result while evaluating a jet.
    Domain(&'static str),
    /// `f_x`, `f_y` are (numerically) dependent at the chart point.
    DegenerateImmersion { x: f64, y: f64, sigma_min: f64 },
    /// The patch (or a supplied attractor) failed its conformality certificate.
    NotConformal { residual: f64 },
    /// A query point could not be resolved to a foot point and normal offset.
    OutsideTube { distance: f64 },
    /// A flow trajectory left the domain of its vector field.
    LeftDomain { t: f64 },
    /// The adaptive step controller underflowed or exceeded its step budget.
    StepFailure { t: f64, h: f64 },
    /// A germ or derivative that must be non-zero vanished.
    ZeroDerivative,
    /// Caller-supplied arguments violate a precondition.
    InvalidInput(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::DegenerateImmersion { x, y, sigma_min } => write!(
                f,
                "degenerate immersion at ({x}, {y}): smallest singular value {sigma_min:e}"
            ),
            Error::NotConformal { residual } => {
                write!(f, "conformality certificate failed (residual {residual:e})")
            }
            Error::OutsideTube { distance } => {
                write!(f, "point outside tubular neighbourhood (distance {distance:e})")
            }
            Error::LeftDomain { t } => write!(f, "trajectory left the field's domain at t = {t}"),
            Error::StepFailure { t, h } => write!(f, "step control failure at t = {t} (h = {h:e})"),
            Error::ZeroDerivative => write!(f, "first derivative vanishes"),
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
