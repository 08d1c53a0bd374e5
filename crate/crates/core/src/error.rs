use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("price vector must be strictly positive, got {0:?}")]
    NonPositivePrice(Vec<f64>),

    #[error("payoff is not finite at {0:?}")]
    NonFinite(Vec<f64>),

    #[error("supergradient is not tight: c·R = {dot}, V(c) = {value}")]
    NotTight { dot: f64, value: f64 },

    #[error("payoff is not consistent: {0}")]
    Inconsistent(String),

    #[error("traced boundary is not monotone near R1 = {r1}")]
    NonMonotone { r1: f64 },

    #[error("{what} = {value} is outside the domain [{lo}, {hi}]")]
    Domain { what: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("holdings are not strictly decreasing in price near c = {price}")]
    NonMonotoneHoldings { price: f64 },

    #[error("forward problem is unbounded below")]
    Unbounded,

    #[error("operation needs a two-coin trading set with an explicit boundary")]
    NoBoundary,

    #[error("{excluded} of {paths} paths left the set's valid price range")]
    TooManyExcluded { excluded: usize, paths: usize },
}
