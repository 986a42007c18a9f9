use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The round-trip product `R1 * R2` is too close to one for a finite finesse.
    #[error("degenerate cavity: R1*R2 = {product} leaves no finite finesse")]
    DegenerateCavity { product: f64 },

    /// The reflected carrier vanishes, so it no longer defines a phase reference.
    #[error("carrier extinguished at detuning {detuning}: |r| = {magnitude:e}")]
    CarrierExtinguished { detuning: f64, magnitude: f64 },

    #[error("detuning {detuning} outside the single-resonance domain |detuning| <= {limit}")]
    OutOfDomain { detuning: f64, limit: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }

    /// True for errors caused by bad inputs rather than by the numerics.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::DegenerateCavity { .. } | Error::OutOfDomain { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
