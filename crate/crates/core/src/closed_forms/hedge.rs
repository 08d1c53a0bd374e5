use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::conjugate::{BoundaryCurve, Node, Provenance, TracedCurve, TradingSet};
use crate::{Error, Result};

/// Fixes the additive constant left free by integrating the marginal price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HedgeConstant {
    /// The curve passes through `(r1, r2)`.
    Fixed { r1: f64, r2: f64 },
    /// The pool is worth `value` at relative price `price`:
    /// `price · R₁(price) + φ(R₁(price)) = value`.
    Calibrate { price: f64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeOptions {
    /// Log-spaced prices at which holdings are sampled.
    pub nodes: usize,
    /// Adaptive Simpson tolerance per interval, relative to its integral.
    pub quadrature_tol: f64,
}

impl Default for HedgeOptions {
    fn default() -> Self {
        HedgeOptions { nodes: 513, quadrature_tol: 1e-12 }
    }
}

/// The CFMM whose optimal holdings of the traded coin are `holdings(c₁)`.
///
/// With `p` the inverse of the holdings, the marginal price of the pool,
/// `dR₂/dR₁ = −p(R₁)`; the boundary is `φ(R₁) = k − ∫ p(R₁) dR₁`. The integral
/// is taken by adaptive Simpson between sampled holdings, inverting the
/// holdings by bisection in log-price.
pub fn delta_hedge_curve<H>(
    holdings: H,
    price_range: (f64, f64),
    constant: HedgeConstant,
    opts: &HedgeOptions,
) -> Result<TradingSet>
where
    H: Fn(f64) -> f64,
{
    let (lo, hi) = price_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || opts.nodes < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "hedge needs a price range 0 < lo < hi and at least 2 nodes, got [{lo}, {hi}]"
        )));
    }
    let (log_lo, log_hi) = (libm::log(lo), libm::log(hi));
    let mut prices: Vec<f64> =
        (0..opts.nodes).map(|i| libm::exp(log_lo + (log_hi - log_lo) * i as f64 / (opts.nodes - 1) as f64)).collect();
    prices[0] = lo;
    prices[opts.nodes - 1] = hi;
    let held = sample(&holdings, &prices)?;

    // the price at which the constant is pinned becomes a node
    let anchor = match constant {
        HedgeConstant::Calibrate { price, .. } => {
            if !(price >= lo && price <= hi) {
                return Err(Error::Domain { what: "calibration price", value: price, lo, hi });
            }
            price
        }
        HedgeConstant::Fixed { r1, .. } => {
            let (h_min, h_max) = (held[held.len() - 1], held[0]);
            if !(r1 >= h_min && r1 <= h_max) {
                return Err(Error::Domain { what: "reference holding", value: r1, lo: h_min, hi: h_max });
            }
            invert(&holdings, r1, lo, hi)
        }
    };
    match prices.binary_search_by(|p| p.total_cmp(&anchor)) {
        Ok(_) => {}
        Err(i) => prices.insert(i, anchor),
    }
    let held = sample(&holdings, &prices)?;

    // nodes by increasing R₁, i.e. decreasing price
    let count = prices.len();
    let mut x = Vec::with_capacity(count);
    let mut price = Vec::with_capacity(count);
    for i in (0..count).rev() {
        x.push(held[i]);
        price.push(prices[i]);
    }
    let mut y = Vec::with_capacity(count);
    y.push(0.0);
    for i in 0..count - 1 {
        let (plo, phi) = (price[i + 1], price[i]);
        let p = |r: f64| invert(&holdings, r, plo, phi);
        let area = simpson(&p, x[i], x[i + 1], opts.quadrature_tol);
        y.push(y[i] - area);
    }

    let anchor_idx = price.iter().position(|&p| p == anchor).expect("anchor price is a node");
    let target = match constant {
        HedgeConstant::Fixed { r2, .. } => r2,
        HedgeConstant::Calibrate { price: c0, value } => value - c0 * x[anchor_idx],
    };
    let shift = target - y[anchor_idx];

    let nodes: Vec<Node> = (0..count)
        .map(|i| Node { r1: x[i], r2: y[i] + shift, support_left: -price[i], support_right: -price[i] })
        .collect();
    let curve = TracedCurve::from_nodes(&nodes, (lo, hi))?;
    if curve.domain().0 < 0.0 {
        return Err(Error::InvalidParameter("holdings must be nonnegative".into()));
    }
    Ok(TradingSet::from_curve(Arc::new(curve), Provenance::DeltaHedge))
}

fn sample<H: Fn(f64) -> f64>(holdings: &H, prices: &[f64]) -> Result<Vec<f64>> {
    let held: Vec<f64> = prices.iter().map(|&p| holdings(p)).collect();
    for i in 0..held.len() {
        if !held[i].is_finite() {
            return Err(Error::NonFinite(alloc::vec![prices[i], held[i]]));
        }
        if i > 0 && !(held[i] < held[i - 1]) {
            return Err(Error::NonMonotoneHoldings { price: prices[i] });
        }
    }
    Ok(held)
}

/// The price in `[lo, hi]` at which decreasing `holdings` equal `r`.
fn invert<H: Fn(f64) -> f64>(holdings: &H, r: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (libm::log(lo), libm::log(hi));
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if holdings(libm::exp(mid)) > r {
            a = mid;
        } else {
            b = mid;
        }
    }
    libm::exp(0.5 * (a + b))
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol * (1e-300 + (left + right).abs()) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, tol, depth - 1)
}
