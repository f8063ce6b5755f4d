use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("impedance spectrum has no valid points")]
    EmptySpectrum,
    #[error("grid half-rate {half_rate_hz} Hz lies below f_lim = {f_lim_hz} Hz")]
    MismatchedGrid { half_rate_hz: f64, f_lim_hz: f64 },
    #[error("frequencies must be strictly increasing (index {index})")]
    NonIncreasingFrequency { index: usize },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("reflectance pole at bin {bin}: Z_ec = -Z0")]
    PoleAtBin { bin: usize },
    #[error("characteristic impedance did not converge after {iterations} iterations (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },
    #[error("characteristic impedance iterate became non-positive ({z0})")]
    NonPositiveZ0 { z0: f64 },
    #[error("termination interval [{lo}, {hi}] m contains no samples")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("no local minimum of |Z_ec| above {above_hz} Hz")]
    NoMinimumFound { above_hz: f64 },
    #[error("area function is empty")]
    EmptyAreaFunction,
    #[error("spectra cannot be aligned on the {lo_hz}-{hi_hz} Hz band")]
    GridMismatch { lo_hz: f64, hi_hz: f64 },
    #[error("regression needs at least two distinct abscissae")]
    DegenerateFit,
    #[error("need at least {needed} groups, got {got}")]
    InsufficientGroups { needed: usize, got: usize },
    #[error("termination {termination_m} m lies beyond the area function extent {extent_m} m")]
    TerminationBeyondArea { termination_m: f64, extent_m: f64 },
    #[error("termination rule {rule} needs a reference transfer impedance")]
    ReferenceRequired { rule: &'static str },
    #[error("termination length {what} was not found in the search interval")]
    LengthAbsent { what: &'static str },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid horn specification: {0}")]
    InvalidHorn(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySpectrum => "EmptySpectrum",
            Error::MismatchedGrid { .. } => "MismatchedGrid",
            Error::NonIncreasingFrequency { .. } => "NonIncreasingFrequency",
            Error::NonFinite { .. } => "NonFinite",
            Error::PoleAtBin { .. } => "PoleAtBin",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NonPositiveZ0 { .. } => "NonPositiveZ0",
            Error::EmptyInterval { .. } => "EmptyInterval",
            Error::NoMinimumFound { .. } => "NoMinimumFound",
            Error::EmptyAreaFunction => "EmptyAreaFunction",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::DegenerateFit => "DegenerateFit",
            Error::InsufficientGroups { .. } => "InsufficientGroups",
            Error::TerminationBeyondArea { .. } => "TerminationBeyondArea",
            Error::ReferenceRequired { .. } => "ReferenceRequired",
            Error::LengthAbsent { .. } => "LengthAbsent",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidHorn(_) => "InvalidHorn",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
