//! Payoff functions `V: R₊ⁿ → R ∪ {−∞}` and the tools to check and transform
//! them.
//!
//! A CFMM can realize `V` as its liquidity-provider payoff exactly when `V`
//! is *consistent*: concave, nonnegative, nondecreasing and 1-homogeneous
//! (see [`check_consistency`]).

mod consistency;
mod transform;

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::conjugate::Reserves;
use crate::{Error, Extended, Result};

pub use consistency::{check_consistency, AxiomResult, ConsistencyReport, SamplingSpec};
pub use transform::{linear_offset, perspective, CustomGrid, LinearOffset, Perspective, Power, ReducedPayoff};

/// External market prices, one per coin, in units of a common numéraire.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceVector(Vec<f64>);

impl PriceVector {
    /// Requires at least two coins and finite, nonnegative components.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Dimension { expected: 2, got: values.len() });
        }
        if values.iter().any(|&c| !(c.is_finite() && c >= 0.0)) {
            return Err(Error::InvalidParameter(alloc::format!(
                "prices must be finite and nonnegative, got {values:?}"
            )));
        }
        Ok(PriceVector(values))
    }

    /// Two-coin price `(ratio, 1)`: the traded coin quoted in the numéraire.
    pub fn relative(ratio: f64) -> Result<Self> {
        PriceVector::new(alloc::vec![ratio, 1.0])
    }

    /// Two-coin price on the unit simplex with `c₁ / c₂ = ratio`.
    pub fn on_simplex(ratio: f64) -> Result<Self> {
        PriceVector::new(alloc::vec![ratio / (1.0 + ratio), 1.0 / (1.0 + ratio)])
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.0.iter().all(|&c| c > 0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PriceVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// A payoff function of `n` coin prices.
///
/// `value` is extended-real: implementations return [`Extended::NegInf`]
/// outside their domain (any negative price, or a zero numéraire price for
/// perspective payoffs) and never produce NaN.
pub trait Payoff: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, c: &[f64]) -> Extended;

    /// An element of the superdifferential `∂V(c)`, when known in closed form.
    fn supergradient(&self, _c: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// The inner payoff and offset `a` when this payoff is `inner(c) + aᵀc`.
    fn offset(&self) -> Option<(&PayoffRef, &[f64])> {
        None
    }
}

pub type PayoffRef = Arc<dyn Payoff>;

impl fmt::Debug for dyn Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Payoff(n = {})", self.dim())
    }
}

/// Evaluates `v` at `c`, failing unless the value is finite.
pub fn finite_value(v: &dyn Payoff, c: &[f64]) -> Result<f64> {
    v.value(c).finite().ok_or_else(|| Error::NonFinite(c.to_vec()))
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn in_orthant(c: &[f64]) -> bool {
    c.iter().all(|&x| x >= 0.0 && x.is_finite())
}

/// The linear payoff `V(c) = aᵀc`: simply holding `aᵢ` of coin `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    a: Vec<f64>,
}

impl Linear {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::Dimension { expected: 2, got: a.len() });
        }
        if a.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::InvalidParameter(alloc::format!(
                "linear payoff holdings must be nonnegative, got {a:?}"
            )));
        }
        Ok(Linear { a })
    }

    pub fn holdings(&self) -> &[f64] {
        &self.a
    }
}

impl Payoff for Linear {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, c: &[f64]) -> Extended {
        if c.len() != self.a.len() || !in_orthant(c) {
            return Extended::NegInf;
        }
        Extended::Finite(dot(&self.a, c))
    }

    fn supergradient(&self, _c: &[f64]) -> Option<Vec<f64>> {
        Some(self.a.clone())
    }
}

/// A payoff given by a closure, with no analytic supergradient.
///
/// NaN results are read as `−∞`.
pub struct FnPayoff<F> {
    n: usize,
    f: F,
}

impl<F> FnPayoff<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        FnPayoff { n, f }
    }
}

impl<F> Payoff for FnPayoff<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, c: &[f64]) -> Extended {
        if c.len() != self.n || !in_orthant(c) {
            return Extended::NegInf;
        }
        Extended::from_f64((self.f)(c)).unwrap_or(Extended::NegInf)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Central finite-difference estimate of `∇V(c)` with step `h`.
///
/// Components are clamped at zero: a nondecreasing payoff has nonnegative
/// supergradients, so a negative estimate is noise.
pub fn supergradient_fd(v: &dyn Payoff, c: &PriceVector, h: f64) -> Result<Reserves> {
    check_dim(v.dim(), c.len())?;
    if !c.is_strictly_positive() {
        return Err(Error::NonPositivePrice(c.to_vec()));
    }
    let min_c = c.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(h > 0.0 && h < min_c) {
        return Err(Error::InvalidParameter(alloc::format!("finite-difference step {h} must lie in (0, {min_c})")));
    }
    Reserves::new(fd_gradient(v, c, h)?)
}

pub(crate) fn fd_gradient(v: &dyn Payoff, c: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut probe = c.to_vec();
    let mut grad = Vec::with_capacity(c.len());
    for i in 0..c.len() {
        probe[i] = c[i] + h;
        let up = finite_value(v, &probe)?;
        probe[i] = c[i] - h;
        let down = finite_value(v, &probe)?;
        probe[i] = c[i];
        grad.push(((up - down) / (2.0 * h)).max(0.0));
    }
    Ok(grad)
}

/// Default finite-difference step: cube root of machine epsilon, relative to
/// the smallest price.
pub(crate) fn default_fd_step(c: &[f64]) -> f64 {
    let min_c = c.iter().cloned().fold(f64::INFINITY, f64::min);
    6e-6 * min_c
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn price_vector_validation() {
        assert!(PriceVector::new(vec![1.0]).is_err());
        assert!(PriceVector::new(vec![1.0, -1.0]).is_err());
        assert!(PriceVector::new(vec![1.0, f64::NAN]).is_err());
        let p = PriceVector::on_simplex(3.0).unwrap();
        assert!((p[0] + p[1] - 1.0).abs() < 1e-15);
        assert!((p[0] / p[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn fd_gradient_of_geometric_mean() {
        let v = FnPayoff::new(2, |c: &[f64]| libm::sqrt(c[0] * c[1]));
        let c = PriceVector::new(vec![1.0, 1.0]).unwrap();
        let g = supergradient_fd(&v, &c, 1e-5).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-8 && (g[1] - 0.5).abs() < 1e-8, "{g:?}");
    }

    #[test]
    fn fd_gradient_of_weighted_mean() {
        let v = FnPayoff::new(2, |c: &[f64]| libm::pow(c[0], 0.8) * libm::pow(c[1], 0.2));
        let c = PriceVector::new(vec![1.0, 1.0]).unwrap();
        let g = supergradient_fd(&v, &c, 1e-5).unwrap();
        assert!((g[0] - 0.8).abs() < 1e-8 && (g[1] - 0.2).abs() < 1e-8, "{g:?}");
    }

    #[test]
    fn fd_gradient_of_linear_is_exact() {
        let v = Linear::new(vec![1.5, 0.25]).unwrap();
        let c = PriceVector::new(vec![3.0, 7.0]).unwrap();
        let g = supergradient_fd(&v, &c, 1e-3).unwrap();
        assert!((g[0] - 1.5).abs() < 1e-12 && (g[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fd_gradient_errors() {
        let v = FnPayoff::new(2, |c: &[f64]| if c[0] > 1.0 { f64::NAN } else { c[0] });
        let c = PriceVector::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(supergradient_fd(&v, &c, 1e-3), Err(Error::NonFinite(_))));
        let c0 = PriceVector::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(supergradient_fd(&v, &c0, 1e-3), Err(Error::NonPositivePrice(_))));
        assert!(supergradient_fd(&v, &c, 2.0).is_err());
    }

    #[test]
    fn fd_clamps_negative_components() {
        let v = FnPayoff::new(2, |c: &[f64]| c[0] - 1e-3 * c[1]);
        let c = PriceVector::new(vec![1.0, 1.0]).unwrap();
        let g = supergradient_fd(&v, &c, 1e-4).unwrap();
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn linear_payoff() {
        let v = Linear::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(v.value(&[3.0, 4.0]), Extended::Finite(11.0));
        assert_eq!(v.value(&[-1.0, 4.0]), Extended::NegInf);
        assert!(Linear::new(vec![1.0, -2.0]).is_err());
    }
}
