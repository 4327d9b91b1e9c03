use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid Lévy measure: {0}")]
    InvalidMeasure(String),

    #[error("moment of order {p} is infinite")]
    InfiniteMoment { p: f64 },

    #[error("no jump mass above cutoff {eps}")]
    ZeroTailMass { eps: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("noise field does not match geometry: {0}")]
    NoiseMismatch(String),

    #[error("integrand support is unbounded or leaves [0, {horizon}]")]
    UnboundedSupport { horizon: f64 },

    #[error("quadrature did not converge on [{a}, {b}] (estimated error {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("cannot fit growth rate: {0}")]
    Fit(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($variant:ident, $($arg:tt)*) => {
        $crate::error::Error::$variant(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
