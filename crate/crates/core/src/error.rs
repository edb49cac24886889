//! Error types shared across the crate.

/// A bound check that failed: the empirical quantity exceeded its analytic
/// envelope. Carried by [`Error::BoundViolated`] so callers can report the
/// offending row.
#[derive(Debug, Clone)]
pub struct BoundViolation {
    /// Which check failed (e.g. "lieb-robinson", "clustering").
    pub check: String,
    /// Parameter at which it failed (time, imaginary displacement, ...).
    pub parameter: f64,
    pub empirical: f64,
    pub analytic: f64,
}

impl std::fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} at {}: empirical {:.6e} > analytic {:.6e}",
            self.check, self.parameter, self.empirical, self.analytic
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("decay profile evaluates to zero at distance {distance}")]
    DivisionByZeroProfile { distance: f64 },

    #[error("empty site set passed to {0}")]
    EmptySet(&'static str),

    #[error("Hilbert space dimension {dim} exceeds the dense cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("observable support is not contained in the volume")]
    SupportNotContained,

    #[error("matrix is not Hermitian (max entry deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("imaginary-time span b*(E_max - E_0) = {0:.3e} exceeds 300; overflow is certain")]
    OverflowRisk(f64),

    #[error("|Phi|_a * C_a = 0; use an explicit small-coupling fallback instead")]
    DegenerateNorm,

    #[error("bound violated: {0}")]
    BoundViolated(Box<BoundViolation>),

    #[error("surface-chain enumeration exceeded the cap of {cap} chains")]
    EnumerationCap { cap: usize },

    #[error("localization ball requires a decay rate a > 0")]
    RateZero,

    #[error("site {site} factor has norm {norm:.6e}; not a normalized product state")]
    NotProductState { site: usize, norm: f64 },

    #[error("every eigenvalue lies within the degeneracy tolerance of the ground energy")]
    AllDegenerate,

    #[error("b*gamma = {b_gamma:.6e} exceeds 2*mu*d = {two_mu_d:.6e}; clustering hypothesis fails")]
    BRange { b_gamma: f64, two_mu_d: f64 },

    #[error("ground-sector component of B survives subtraction (norm {0:.3e})")]
    ConditionViolated(f64),

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("ground state degenerate within tolerance (first gap {gap:.3e})")]
    DegenerateGround { gap: f64 },

    #[error("state norm drifted by {drift:.3e} at theta = {theta:.6}; reduce the ODE step")]
    NormDrift { theta: f64, drift: f64 },

    #[error("trial state overlap |<psi0,psi1>| = {0} leaves no variational weight")]
    OverlapTooLarge(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
