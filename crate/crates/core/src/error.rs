use thiserror::Error;

/// Error type shared by every operation in the crate.
///
/// Variants split into three families that the command-line front end maps to
/// distinct exit codes: invalid model data, violated preconditions, and
/// genuine numerical failures.
#[derive(Debug, Clone, Error)]
pub enum SpectralError {
    #[error("model invalid: {0}")]
    InvalidModel(String),

    #[error("grid resolution must be at least 2, got {0}")]
    InvalidResolution(usize),

    #[error("degenerate dispersion: second-moment sum {0} is not positive")]
    DegenerateDispersion(f64),

    #[error("masses must be positive and finite, got {0}")]
    InvalidMass(f64),

    #[error("momenta do not lie on the fiber: |k1 + k2 + k3 - K| = {0:.3e}")]
    NotOnFiber(f64),

    #[error("spectral parameter z = {z} out of domain: {reason}")]
    OutOfDomain { z: f64, reason: String },

    #[error("singular denominator: symbol value within {0:.3e} of z at a grid point")]
    SingularDenominator(f64),

    #[error("z = {0} lies in a channel spectrum: resolvent block is numerically singular")]
    ZInChannelSpectrum(f64),

    #[error("matrix dimension {dim} exceeds the cap {cap} for {what}")]
    DimensionCap {
        dim: usize,
        cap: usize,
        what: &'static str,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;
