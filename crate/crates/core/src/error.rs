use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("wavelength {wavelength_um} um outside supported band [{min_um}, {max_um}] um")]
    WavelengthOutOfBand { wavelength_um: f64, min_um: f64, max_um: f64 },

    #[error("evanescent wave: |q| = {q:e} 1/m exceeds k = {k:e} 1/m")]
    Evanescent { q: f64, k: f64 },

    #[error("extraordinary angle iteration did not converge after {iterations} iterations")]
    AngleIteration { iterations: usize },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("truncation weight {weight:e} too large at N_max = {n_max}; need N_max >= {required}")]
    Truncation { weight: f64, n_max: usize, required: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for errors caused by numerical non-convergence.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::AngleIteration { .. } | Error::Quadrature { .. } | Error::Truncation { .. })
    }
}
