use std::fmt;

/// Everything that can go wrong across the crate.
#[derive(Debug)]
pub enum Error {
    /// Grid construction rejected (non-power-of-two n, n < 8, length <= 0).
    InvalidGrid(String),
    /// Model parameters violate their invariants.
    InvalidParams(String),
    /// Sample or coefficient count does not match the grid.
    SizeMismatch { expected: usize, got: usize },
    /// Negative-order Riesz potential applied to a field with nonzero mean.
    NonMeanZero,
    /// Operator argument out of its admissible range.
    InvalidArgument(String),
    /// Weight family parameters rejected (eps <= 0 or b < 5 eps).
    InvalidWeight(String),
    /// Non-finite coefficients or H^N blowup cap exceeded during stepping.
    Instability { t: f64 },
    /// L^2 mass in the outer 10% of the domain exceeded the configured
    /// fraction of the total; the periodic approximation is no longer valid.
    BoundaryContamination { t: f64, fraction: f64 },
    /// Picard iteration failed to contract within the iteration budget.
    PicardDiverged { iterations: usize, last_delta: f64 },
    /// A moving window left the computational domain.
    WindowExitsDomain { t: f64, cut: f64 },
    /// Initial-data descriptor rejected.
    InvalidInitialData(String),
    /// Configuration file rejected.
    Config(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::InvalidParams(msg) => write!(f, "invalid model parameters: {msg}"),
            Error::SizeMismatch { expected, got } => {
                write!(f, "size mismatch: expected {expected} values, got {got}")
            }
            Error::NonMeanZero => {
                write!(f, "negative-order Riesz potential requires a mean-zero field")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidWeight(msg) => write!(f, "invalid weight parameters: {msg}"),
            Error::Instability { t } => {
                write!(f, "instability detected at t = {t} (non-finite or H^N cap exceeded)")
            }
            Error::BoundaryContamination { t, fraction } => write!(
                f,
                "boundary contamination at t = {t}: outer-domain mass fraction {fraction:.3e}"
            ),
            Error::PicardDiverged { iterations, last_delta } => write!(
                f,
                "Picard iteration did not converge after {iterations} iterations \
                 (last sup-in-time L2 increment {last_delta:.3e})"
            ),
            Error::WindowExitsDomain { t, cut } => {
                write!(f, "window cut {cut} leaves the domain at t = {t}")
            }
            Error::InvalidInitialData(msg) => write!(f, "invalid initial data: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}
