use thiserror::Error;

/// Errors raised by the key-rate numerics and the Fock-space oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is out of range: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("unphysical covariance matrix: {0}")]
    UnphysicalCovariance(String),

    #[error("Fock truncation N = {cutoff} leaves tail mass {tail:e} (limit {limit:e})")]
    Truncation { cutoff: usize, tail: f64, limit: f64 },

    #[error("noiseless amplification diverges (geometric ratio {ratio} >= 1)")]
    DivergentAmplification { ratio: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "a finite number",
        })
    }
}
