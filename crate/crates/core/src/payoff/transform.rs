use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{check_dim, dot, in_orthant, Payoff, PayoffRef};
use crate::{Error, Extended, Result};

/// A payoff quoted against the numéraire: a function of the `m = n − 1`
/// non-numéraire prices `c′`.
pub trait ReducedPayoff: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, c: &[f64]) -> Extended;

    fn gradient(&self, _c: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// Perspective lift `V(c′, cₙ) = cₙ · U(c′ / cₙ)`, `−∞` when `cₙ ≤ 0`.
///
/// `V` is 1-homogeneous by construction and concave whenever `U` is, and
/// `V(c′, 1) = U(c′)` exactly.
#[derive(Debug, Clone)]
pub struct Perspective<U> {
    reduced: U,
}

impl<U: ReducedPayoff> Perspective<U> {
    pub fn new(reduced: U) -> Self {
        Perspective { reduced }
    }

    pub fn reduced(&self) -> &U {
        &self.reduced
    }

    fn split(c: &[f64]) -> (&[f64], f64) {
        let (head, tail) = c.split_at(c.len() - 1);
        (head, tail[0])
    }
}

pub fn perspective<U: ReducedPayoff + 'static>(reduced: U) -> PayoffRef {
    Arc::new(Perspective::new(reduced))
}

impl<U: ReducedPayoff> Payoff for Perspective<U> {
    fn dim(&self) -> usize {
        self.reduced.dim() + 1
    }

    fn value(&self, c: &[f64]) -> Extended {
        if c.len() != self.dim() || !in_orthant(c) {
            return Extended::NegInf;
        }
        let (head, numeraire) = Self::split(c);
        if numeraire <= 0.0 {
            return Extended::NegInf;
        }
        if numeraire == 1.0 {
            return self.reduced.value(head);
        }
        let scaled: Vec<f64> = head.iter().map(|&x| x / numeraire).collect();
        self.reduced.value(&scaled).scale(numeraire)
    }

    fn supergradient(&self, c: &[f64]) -> Option<Vec<f64>> {
        if c.len() != self.dim() || !in_orthant(c) {
            return None;
        }
        let (head, numeraire) = Self::split(c);
        if numeraire <= 0.0 {
            return None;
        }
        let x: Vec<f64> = head.iter().map(|&v| v / numeraire).collect();
        let mut grad = self.reduced.gradient(&x)?;
        let u = self.reduced.value(&x).finite()?;
        let last = u - dot(&x, &grad);
        grad.push(last);
        Some(grad)
    }
}

/// `U(c) = cʷ` for a single traded coin, `0 < w ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power {
    w: f64,
}

impl Power {
    pub fn new(w: f64) -> Result<Self> {
        if !(w > 0.0 && w <= 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("power exponent must lie in (0, 1], got {w}")));
        }
        Ok(Power { w })
    }

    pub fn exponent(&self) -> f64 {
        self.w
    }
}

impl ReducedPayoff for Power {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, c: &[f64]) -> Extended {
        match c {
            [x] if *x >= 0.0 => Extended::Finite(libm::pow(*x, self.w)),
            _ => Extended::NegInf,
        }
    }

    fn gradient(&self, c: &[f64]) -> Option<Vec<f64>> {
        match c {
            [x] if *x > 0.0 => Some(alloc::vec![self.w * libm::pow(*x, self.w - 1.0)]),
            _ => None,
        }
    }
}

/// Tabulated reduced payoff, piecewise linear in log-price.
///
/// Below the first knot the table is continued linearly through the origin,
/// above the last knot it is flat. The gradient at a knot is taken from the
/// segment on its left.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomGrid {
    log_prices: Vec<f64>,
    prices: Vec<f64>,
    values: Vec<f64>,
}

impl CustomGrid {
    pub fn new(prices: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if prices.len() != values.len() {
            return Err(Error::Dimension { expected: prices.len(), got: values.len() });
        }
        if prices.len() < 2 {
            return Err(Error::InvalidParameter("custom grid needs at least two knots".into()));
        }
        if prices.iter().any(|&p| !(p > 0.0 && p.is_finite())) || prices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("custom grid prices must be positive and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("custom grid values must be finite".into()));
        }
        let log_prices = prices.iter().map(|&p| libm::log(p)).collect();
        Ok(CustomGrid { log_prices, prices, values })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index `j` of the segment `[x_j, x_{j+1}]` that owns `x`.
    fn segment(&self, x: f64) -> usize {
        let idx = self.prices.partition_point(|&p| p < x);
        idx.saturating_sub(1).min(self.prices.len() - 2)
    }

    fn segment_slope(&self, j: usize) -> f64 {
        (self.values[j + 1] - self.values[j]) / (self.log_prices[j + 1] - self.log_prices[j])
    }
}

impl ReducedPayoff for CustomGrid {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, c: &[f64]) -> Extended {
        let x = match c {
            [x] if *x >= 0.0 => *x,
            _ => return Extended::NegInf,
        };
        let first = self.prices[0];
        let last = *self.prices.last().unwrap();
        if x <= first {
            return Extended::Finite(self.values[0] * x / first);
        }
        if x >= last {
            return Extended::Finite(*self.values.last().unwrap());
        }
        let j = self.segment(x);
        let t = libm::log(x) - self.log_prices[j];
        Extended::Finite(self.values[j] + self.segment_slope(j) * t)
    }

    fn gradient(&self, c: &[f64]) -> Option<Vec<f64>> {
        let x = match c {
            [x] if *x > 0.0 => *x,
            _ => return None,
        };
        let first = self.prices[0];
        let last = *self.prices.last().unwrap();
        let g = if x <= first {
            self.values[0] / first
        } else if x > last {
            0.0
        } else {
            self.segment_slope(self.segment(x)) / x
        };
        Some(alloc::vec![g])
    }
}

/// `V′(c) = V(c) + aᵀc`; the trading set of `V′` is that of `V` shifted by
/// `a`.
#[derive(Debug, Clone)]
pub struct LinearOffset {
    inner: PayoffRef,
    a: Vec<f64>,
}

impl LinearOffset {
    pub fn inner(&self) -> &PayoffRef {
        &self.inner
    }

    pub fn shift(&self) -> &[f64] {
        &self.a
    }
}

/// Adds the holding `a ≥ 0` to a payoff. Nested offsets are merged, so
/// offsetting by `a` then `b` is the same payoff as offsetting by `a + b`.
pub fn linear_offset(v: PayoffRef, a: Vec<f64>) -> Result<PayoffRef> {
    check_dim(v.dim(), a.len())?;
    if a.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
        return Err(Error::InvalidParameter(alloc::format!("offset must be nonnegative, got {a:?}")));
    }
    let (inner, a) = match v.offset() {
        Some((inner, prev)) => (inner.clone(), prev.iter().zip(&a).map(|(x, y)| x + y).collect()),
        None => (v, a),
    };
    Ok(Arc::new(LinearOffset { inner, a }))
}

impl Payoff for LinearOffset {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, c: &[f64]) -> Extended {
        if c.len() != self.a.len() || !in_orthant(c) {
            return Extended::NegInf;
        }
        self.inner.value(c) + dot(&self.a, c)
    }

    fn supergradient(&self, c: &[f64]) -> Option<Vec<f64>> {
        let mut g = self.inner.supergradient(c)?;
        for (gi, ai) in g.iter_mut().zip(&self.a) {
            *gi += ai;
        }
        Some(g)
    }

    fn offset(&self) -> Option<(&PayoffRef, &[f64])> {
        Some((&self.inner, &self.a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payoff::Linear;
    use alloc::vec;

    fn sqrt_payoff() -> PayoffRef {
        perspective(Power::new(0.5).unwrap())
    }

    #[test]
    fn perspective_examples() {
        let v = sqrt_payoff();
        assert_eq!(v.value(&[4.0, 1.0]), Extended::Finite(2.0));
        assert_eq!(v.value(&[4.0, 4.0]), Extended::Finite(4.0));
        assert_eq!(v.value(&[1.0, 0.0]), Extended::NegInf);
    }

    #[test]
    fn perspective_supergradient_matches_geometric_mean() {
        let v = sqrt_payoff();
        let g = v.supergradient(&[4.0, 1.0]).unwrap();
        // ∇√(c₁c₂) = (½√(c₂/c₁), ½√(c₁/c₂))
        assert!((g[0] - 0.25).abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15, "{g:?}");
    }

    #[test]
    fn linear_offset_examples() {
        let zero = Arc::new(Linear::new(vec![0.0, 0.0]).unwrap());
        let v = linear_offset(zero, vec![1.0, 2.0]).unwrap();
        assert_eq!(v.value(&[3.0, 4.0]), Extended::Finite(11.0));

        let v = linear_offset(sqrt_payoff(), vec![1.0, 0.0]).unwrap();
        assert_eq!(v.value(&[1.0, 1.0]), Extended::Finite(2.0));
        let (_, shift) = v.offset().unwrap();
        assert_eq!(shift, &[1.0, 0.0]);
    }

    #[test]
    fn nested_offsets_merge() {
        let v = linear_offset(sqrt_payoff(), vec![1.0, 0.5]).unwrap();
        let v = linear_offset(v, vec![0.25, 2.0]).unwrap();
        let (_, shift) = v.offset().unwrap();
        assert_eq!(shift, &[1.25, 2.5]);
        assert!(linear_offset(sqrt_payoff(), vec![-1.0, 0.0]).is_err());
        assert!(linear_offset(sqrt_payoff(), vec![1.0]).is_err());
    }

    #[test]
    fn custom_grid_interpolates_in_log_price() {
        let g = CustomGrid::new(vec![1.0, 4.0], vec![1.0, 3.0]).unwrap();
        // midpoint in log space is price 2
        assert!((g.value(&[2.0]).finite().unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(g.value(&[0.5]), Extended::Finite(0.5));
        assert_eq!(g.value(&[10.0]), Extended::Finite(3.0));
        let slope = 2.0 / libm::log(4.0);
        assert!((g.gradient(&[2.0]).unwrap()[0] - slope / 2.0).abs() < 1e-14);
        // left-continuous at the last knot
        assert!((g.gradient(&[4.0]).unwrap()[0] - slope / 4.0).abs() < 1e-14);
        assert_eq!(g.gradient(&[5.0]).unwrap()[0], 0.0);
    }

    #[test]
    fn custom_grid_validation() {
        assert!(CustomGrid::new(vec![1.0], vec![1.0]).is_err());
        assert!(CustomGrid::new(vec![2.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(CustomGrid::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(CustomGrid::new(vec![0.0, 2.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn power_validation() {
        assert!(Power::new(0.0).is_err());
        assert!(Power::new(1.5).is_err());
        assert!(Power::new(1.0).is_ok());
    }
}
