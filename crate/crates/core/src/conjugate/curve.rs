use alloc::vec::Vec;

use super::set::BoundaryCurve;
use crate::{Error, Result};

/// A traced boundary point with its supporting slopes.
///
/// Every price `ρ = c₁/c₂` in `[ρ_lo, ρ_hi]` selects this point, so the
/// boundary leaves it with slope at most `−ρ_hi` to the left and at least
/// `−ρ_lo` to the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub r1: f64,
    pub r2: f64,
    pub support_left: f64,
    pub support_right: f64,
}

/// Shape-preserving piecewise-cubic boundary through traced points.
#[derive(Debug, Clone)]
pub struct TracedCurve {
    x: Vec<f64>,
    y: Vec<f64>,
    // Hermite end slopes of each interval, after monotone limiting
    start_slope: Vec<f64>,
    end_slope: Vec<f64>,
    // per node (left, right) supporting slopes, when known
    support: Option<Vec<(f64, f64)>>,
    valid_prices: (f64, f64),
}

impl TracedCurve {
    /// Curve through supergradient nodes sorted by increasing `R₁`.
    pub fn from_nodes(nodes: &[Node], valid_prices: (f64, f64)) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::NoBoundary);
        }
        let x: Vec<f64> = nodes.iter().map(|n| n.r1).collect();
        let y: Vec<f64> = nodes.iter().map(|n| n.r2).collect();
        check_points(&x, &y)?;
        let mut start_slope = Vec::with_capacity(x.len() - 1);
        let mut end_slope = Vec::with_capacity(x.len() - 1);
        for i in 0..x.len() - 1 {
            let (m0, m1) =
                limit(nodes[i].support_right, nodes[i + 1].support_left, (y[i + 1] - y[i]) / (x[i + 1] - x[i]));
            start_slope.push(m0);
            end_slope.push(m1);
        }
        let support = Some(nodes.iter().map(|n| (n.support_left, n.support_right)).collect());
        Ok(TracedCurve { x, y, start_slope, end_slope, support, valid_prices })
    }

    /// Monotone cubic through bare `(R₁, R₂)` points, as read from a CSV.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::NoBoundary);
        }
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        check_points(&x, &y)?;
        let n = x.len();
        let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = Vec::with_capacity(n);
        m.push(secant[0]);
        for i in 1..n - 1 {
            m.push(0.5 * (secant[i - 1] + secant[i]));
        }
        m.push(secant[n - 2]);
        let mut start_slope = Vec::with_capacity(n - 1);
        let mut end_slope = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let (m0, m1) = limit(m[i], m[i + 1], secant[i]);
            start_slope.push(m0);
            end_slope.push(m1);
        }
        let valid_prices = ((-secant[n - 2]).max(0.0), if secant[0] < 0.0 { -secant[0] } else { f64::INFINITY });
        Ok(TracedCurve { x, y, start_slope, end_slope, support: None, valid_prices })
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.x.iter().copied().zip(self.y.iter().copied()).collect()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn interval(&self, r1: f64) -> usize {
        let i = self.x.partition_point(|&x| x <= r1);
        i.saturating_sub(1).min(self.x.len() - 2)
    }
}

fn check_points(x: &[f64], y: &[f64]) -> Result<()> {
    for i in 0..x.len() {
        if !(x[i].is_finite() && y[i].is_finite()) {
            return Err(Error::NonFinite(alloc::vec![x[i], y[i]]));
        }
        if i > 0 && !(x[i] > x[i - 1]) {
            return Err(Error::NonMonotone { r1: x[i] });
        }
    }
    Ok(())
}

/// Fritsch–Carlson limiting of Hermite end slopes against the secant.
fn limit(m0: f64, m1: f64, secant: f64) -> (f64, f64) {
    if secant == 0.0 {
        return (0.0, 0.0);
    }
    let mut a = m0 / secant;
    let mut b = m1 / secant;
    if !(a >= 0.0) {
        a = 0.0;
    }
    if !(b >= 0.0) {
        b = 0.0;
    }
    let norm = a * a + b * b;
    if norm > 9.0 {
        let t = 3.0 / libm::sqrt(norm);
        a *= t;
        b *= t;
    }
    (a * secant, b * secant)
}

impl BoundaryCurve for TracedCurve {
    fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn knots(&self) -> Option<Vec<(f64, f64)>> {
        Some(self.points())
    }

    fn height(&self, r1: f64) -> f64 {
        let (lo, hi) = self.domain();
        let r1 = r1.clamp(lo, hi);
        let i = self.interval(r1);
        let (x0, x1, y0, y1) = (self.x[i], self.x[i + 1], self.y[i], self.y[i + 1]);
        let h = x1 - x0;
        let t = (r1 - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * self.start_slope[i]
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * self.end_slope[i];
        let chord = y0 + (y1 - y0) * t;
        match &self.support {
            Some(s) => {
                // stay between the chord and the two supporting lines
                let below = (y0 + s[i].1 * (r1 - x0)).max(y1 + s[i + 1].0 * (r1 - x1));
                if below <= chord {
                    value.clamp(below, chord)
                } else {
                    chord
                }
            }
            None => value.min(chord.max(y0.min(y1))),
        }
    }

    fn slope(&self, r1: f64) -> f64 {
        let (lo, hi) = self.domain();
        let r1 = r1.clamp(lo, hi);
        let i = self.interval(r1);
        let (x0, x1, y0, y1) = (self.x[i], self.x[i + 1], self.y[i], self.y[i + 1]);
        let h = x1 - x0;
        let t = (r1 - x0) / h;
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) / h * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * self.start_slope[i]
            + (-6.0 * t2 + 6.0 * t) / h * y1
            + (3.0 * t2 - 2.0 * t) * self.end_slope[i]
    }

    fn valid_prices(&self) -> (f64, f64) {
        self.valid_prices
    }
}
