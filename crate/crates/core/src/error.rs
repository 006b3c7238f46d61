use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("the equator consists entirely of critical points (X·Q_d − Y·P_d vanishes identically)")]
    IdentZeroEquator,
    #[error("both chart eigenvectors are tangent to the equator")]
    DegenerateEigenvector,
    #[error("equilibrium at infinity is not a saddle")]
    NotASaddle,
    #[error("expected a unit vector, got norm {0}")]
    NotUnit(f64),
    #[error("step size underflow at t = {t} (z = {z})")]
    StepUnderflow { t: f64, z: Complex64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("solution blew up at complex time {t}")]
    BlowUp { t: Complex64 },
    #[error("field vanishes on the integration path near {0}")]
    SingularOnPath(Complex64),
    #[error("winding centre lies on the orbit")]
    CenterOnOrbit,
    #[error("point does not separate two distinct centres")]
    NotBetweenCenters,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("ordinates not strictly increasing at line {line}")]
    Monotonicity { line: usize },
    #[error("anchor point coincides with a zero of the product")]
    AnchorIsZero,
    #[error("branch point hit at T = {t}; nearest critical point {near}")]
    BranchPointHit { t: Complex64, near: Complex64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake-case identifier used in diagnostics and by the C interface.
    pub fn code(&self) -> &'static str {
        match self {
            Error::IdentZeroEquator => "ident_zero_equator",
            Error::DegenerateEigenvector => "degenerate_eigenvector",
            Error::NotASaddle => "not_a_saddle",
            Error::NotUnit(_) => "not_unit",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::TooManySteps { .. } => "too_many_steps",
            Error::BlowUp { .. } => "blow_up",
            Error::SingularOnPath(_) => "singular_on_path",
            Error::CenterOnOrbit => "center_on_orbit",
            Error::NotBetweenCenters => "not_between_centers",
            Error::Parse { .. } => "parse",
            Error::Monotonicity { .. } => "monotonicity",
            Error::AnchorIsZero => "anchor_is_zero",
            Error::BranchPointHit { .. } => "branch_point_hit",
            Error::Invalid(_) => "invalid",
        }
    }

    /// Input problems, as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NotUnit(_) | Error::Parse { .. } | Error::Monotonicity { .. } | Error::AnchorIsZero | Error::Invalid(_)
        )
    }
}
