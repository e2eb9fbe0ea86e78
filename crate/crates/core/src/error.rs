use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("unsupported quadrature order {0}; expected one of 4, 8, 16")]
    UnsupportedOrder(usize),

    #[error("series workspace of {nodes} nodes exceeds the ceiling of {ceiling}")]
    BudgetExceeded { nodes: usize, ceiling: usize },

    /// `|D(λ)|` fell below the near-zero floor; no resolvent kernel exists at λ.
    #[error("lambda={lambda} is numerically characteristic (|D|={det_abs:e})")]
    Characteristic { lambda: Complex64, det_abs: f64 },

    #[error("Neumann series diverges: |lambda|*||T|| = {product} >= 1")]
    NeumannDivergence { product: f64 },

    #[error("shifted lambda has a pole at n={n}: 1 - beta_n*lambda = 0")]
    Pole { n: usize },

    #[error("handles do not share a grid and lambda")]
    GridMismatch,
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
