use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("window [{start}, {end}] is outside the sampled range [{first}, {last}]")]
    Range {
        start: f64,
        end: f64,
        first: f64,
        last: f64,
    },

    #[error(
        "integration accuracy not reached after {halvings} step halvings \
         (dt = {dt:e}): norm drift {norm_drift:e}, energy drift {energy_drift:e}"
    )]
    IntegrationAccuracy {
        halvings: u32,
        dt: f64,
        norm_drift: f64,
        energy_drift: f64,
    },

    #[error("particle number N = {n} exceeds the capacity cap N <= {cap}")]
    Capacity { n: u64, cap: u64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("{0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegrationAccuracy { .. } | Error::Numerical(_)
        )
    }
}
