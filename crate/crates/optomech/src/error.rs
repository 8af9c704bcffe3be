//! Error taxonomy shared by every module.

/// Failure modes of builds and evaluations.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Caller passed an argument outside the documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The dyadic Green tensor has no real part at zero separation; only the
    /// coincidence-limit imaginary part is defined (exposed separately).
    #[error("dyadic Green tensor evaluated at zero separation")]
    CoincidenceLimit,

    /// The force tensor diverges at zero separation.
    #[error("force tensor evaluated at zero separation")]
    SingularSeparation,

    /// Blue cooperative detuning: the effective temperature would be
    /// non-positive and the atoms would not remain trapped.
    #[error("negative effective temperature: detuning {detuning} must be below the cooperative resonance")]
    NegativeTemperature { detuning: f64 },

    /// An eigenvalue of the dynamical matrix is non-positive.
    #[error("mechanical instability: squared eigenfrequency {value} at mode {index}")]
    MechanicalInstability { index: usize, value: f64 },

    /// A lattice Fourier sum kept an imaginary part beyond tolerance,
    /// typically because the array is not inversion symmetric about site 0.
    #[error("lattice Fourier sum left imaginary residue {residue:e} (tolerance {tolerance:e}); use an inversion-symmetric (odd-sized) array")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    /// The central-site drive amplitude is zero, so ratios to it are undefined.
    #[error("normalization failure: central-site drive amplitude is zero")]
    ZeroCentralAmplitude,

    /// Quadrature noise combines Bogoliubov pairs from different schemes.
    #[error("mixed detection schemes: {0} vs {1}")]
    MixedSchemes(&'static str, &'static str),

    /// The diffusion matrix failed positive-semidefinite factorization.
    #[error("noise factorization failed: eigenvalue {value:e} below tolerance {tolerance:e}")]
    NoiseFactorization { value: f64, tolerance: f64 },

    /// The stochastic integration produced a non-finite value.
    #[error("integration failure: non-finite state at step {step}, member {member}")]
    IntegrationFailure { step: usize, member: usize },

    /// Trap reconstruction left the small-displacement regime.
    #[error("Lamb-Dicke violation: eta = {eta} exceeds 0.3; the small-displacement expansion does not apply")]
    LambDickeViolation { eta: f64 },
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
