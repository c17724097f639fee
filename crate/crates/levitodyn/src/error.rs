use thiserror::Error;

/// Errors shared across the simulation engines.
#[derive(Debug, Error)]
pub enum Error {
    /// `|sin β|` fell below the configured threshold; the Euler-angle chart
    /// is singular and the N matrix cannot be inverted.
    #[error("gimbal lock: |sin beta| = {sin_beta:.3e} below threshold {threshold:.3e}")]
    GimbalLock { sin_beta: f64, threshold: f64 },

    /// Both ellipticity parameters vanish; no polarization direction exists.
    #[error("degenerate polarization: b_x and b_y are both zero")]
    DegeneratePolarization,

    /// A direction argument was not a unit vector.
    #[error("not a unit vector: |n| = {norm}")]
    NotUnitVector { norm: f64 },

    /// Relative dielectric constant must exceed 1 for a physical particle.
    #[error("unphysical dielectric constant epsilon_R = {epsilon_r}")]
    UnphysicalDielectric { epsilon_r: f64 },

    /// Operator/state dimensions do not match.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The (eta, Xi) correlation matrices violate the positivity block
    /// condition; the most negative eigenvalue is reported.
    #[error("invalid unraveling: block matrix eigenvalue {min_eigenvalue:.3e} < 0")]
    InvalidUnraveling { min_eigenvalue: f64 },

    /// A trajectory produced a non-finite state.
    #[error("numerical blowup at t = {t}: {what}")]
    NumericalBlowup { t: f64, what: String },

    /// Configuration failed schema validation.
    #[error("invalid config: {0}")]
    ConfigInvalid(String),

    /// Welch segment longer than the input series.
    #[error("segment length {segment} exceeds series length {len}")]
    SegmentTooLong { segment: usize, len: usize },

    /// Lorentzian fit failed to converge on a peak.
    #[error("fit diverged: {0}")]
    FitDiverged(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
