//! Error taxonomy for the NIP toolkit.
//!
//! Variants are grouped by the caller's likely reaction:
//!
//! * configuration / precondition problems (`DimensionTooSmall`,
//!   `InvalidWindow`, …) — fix the input;
//! * structural refusals near exceptional points (`ComplexSpectrum`,
//!   `DegenerateMetric`, `SelfOrthogonal`, …) — the requested object does
//!   not exist there, approach the EP differently;
//! * numerical failures (`NumericBlowup`, `Backend`) — the computation
//!   itself broke down and results must not be trusted.

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Model dimension below the smallest nontrivial case.
    #[error("model dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    /// A schedule function returned NaN/inf inside the requested window.
    #[error("schedule produced a non-finite {quantity} at t = {t}")]
    NonFiniteSchedule { quantity: &'static str, t: f64 },

    /// An operator or state has the wrong dimension for the model.
    #[error("operand dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },

    /// An operation that requires a real spectrum met complex eigenvalues.
    #[error(
        "spectrum is not real within tolerance: max |Im| = {max_imag:.3e} \
         against scale {scale:.3e} (outside the quasi-Hermitian domain)"
    )]
    ComplexSpectrum { max_imag: f64, scale: f64 },

    /// The homogeneous Dieudonné system has the wrong solution-family
    /// dimension; the input is degenerate (typically an EP).
    #[error(
        "quasi-Hermiticity solution family has dimension {found}, expected {expected}; \
         degenerate or exceptional-point input"
    )]
    SolutionFamilyDimension { found: usize, expected: usize },

    /// The canonical metric branch degenerates (an eigenvalue reaches zero).
    #[error(
        "metric degenerates: smallest branch eigenvalue {theta_min:.3e} is below \
         the cutoff {cutoff:.3e} (exceptional-point boundary)"
    )]
    DegenerateMetric { theta_min: f64, cutoff: f64 },

    /// A metric that must be positive definite is not.
    #[error(
        "metric is not positive definite: eigenvalue {eigenvalue:.3e} \
         below cutoff {cutoff:.3e}"
    )]
    NotPositiveDefinite { eigenvalue: f64, cutoff: f64 },

    /// The pointwise branch-pinning iteration failed to converge.
    #[error(
        "metric branch reconstruction stalled at tau = {tau}: eigenvalue mismatch \
         {mismatch:.3e} exceeds tolerance {tol:.3e}"
    )]
    BranchPinningFailed { tau: f64, mismatch: f64, tol: f64 },

    /// Sylvester-type solve for the Dyson-map derivative hit a vanishing
    /// denominator.
    #[error(
        "near-singular square-root derivative: eigenvalue sum {denom:.3e} \
         below tolerance {tol:.3e}"
    )]
    NearSingularRoot { denom: f64, tol: f64 },

    /// An observable seed or textbook operator must be Hermitian but is not.
    #[error("matrix is not Hermitian: deviation {deviation:.3e} against scale {scale:.3e}")]
    NotHermitian { deviation: f64, scale: f64 },

    /// An operator fails the quasi-Hermiticity compatibility test.
    #[error(
        "quasi-Hermiticity violated: residual {residual:.3e} exceeds \
         tolerance {tol:.3e}"
    )]
    QuasiHermiticityViolated { residual: f64, tol: f64 },

    /// Eigenvalues too close to separate into a biorthonormal system.
    #[error("eigenvalue gap {gap:.3e} below degeneracy threshold {threshold:.3e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    /// A left/right eigenvector pair is numerically self-orthogonal
    /// (the hallmark of an exceptional point).
    #[error(
        "self-orthogonal eigenvector {index}: <<m|m> = {value:.3e} below \
         threshold {threshold:.3e}"
    )]
    SelfOrthogonal {
        index: usize,
        value: f64,
        threshold: f64,
    },

    /// The physical pseudo-norm vanished, so expectation values are undefined.
    #[error("vanishing pseudo-norm: |<<psi|psi>| = {value:.3e} below {threshold:.3e}")]
    VanishingNorm { value: f64, threshold: f64 },

    /// Bad integration step.
    #[error("integration step must be positive and finite, got {0}")]
    InvalidStep(f64),

    /// Bad time window.
    #[error("time window must satisfy t0 < t1, got [{t0}, {t1}]")]
    InvalidWindow { t0: f64, t1: f64 },

    /// State or operator became non-finite during integration.
    #[error("state became non-finite at t = {t}; last good time was {last_good}")]
    NumericBlowup { t: f64, last_good: f64 },

    /// Scaling fit asked for with too few (or repeated) samples.
    #[error("exceptional-point scaling fit needs at least {needed} distinct samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// Scaling-fit sample outside the near-EP calibration range.
    #[error("scaling-fit sample t = {0} outside the supported range (0, 0.2]")]
    SampleOutOfRange(f64),

    /// Index out of range (eigenvector label, grid index, …).
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// LAPACK/BLAS backend failure.
    #[error("linear algebra backend error: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),
}

impl Error {
    /// True when the error signals an exceptional-point or degeneracy
    /// refusal rather than a misuse or a numerical accident.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::ComplexSpectrum { .. }
                | Error::SolutionFamilyDimension { .. }
                | Error::DegenerateMetric { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::SelfOrthogonal { .. }
        )
    }
}
