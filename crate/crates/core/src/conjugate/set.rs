use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::Membership;
use crate::{Error, Result};

/// Lower boundary `R₂ = φ(R₁)` of a two-coin trading set.
///
/// `φ` is convex on its domain. For upward-closed sets it is also
/// nonincreasing, and the set is everything on or above the curve, continued
/// flat to the right of the domain.
pub trait BoundaryCurve: Send + Sync + fmt::Debug {
    /// `[lo, hi]` in `R₁`; `hi` may be `+∞`.
    fn domain(&self) -> (f64, f64);

    /// Minimal feasible `R₂` at `r1` (clamped into the domain).
    fn height(&self, r1: f64) -> f64;

    /// `dφ/dR₁` at an interior `r1`.
    fn slope(&self, r1: f64) -> f64;

    /// Relative prices `c₁/c₂` over which the set delivers its target payoff.
    fn valid_prices(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn upward_closed(&self) -> bool {
        true
    }

    /// Interpolation knots, for curves tabulated from data.
    fn knots(&self) -> Option<Vec<(f64, f64)>> {
        None
    }
}

/// A trading set in three or more coins, known through a membership oracle.
pub trait Region: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn classify(&self, r: &[f64], tol: f64) -> Membership;

    /// Concave gauge `f(R) = sup { s > 0 | R ∈ s·S }`, so `S = { f ≥ 1 }`.
    ///
    /// The default finds the crossing of the ray through `r` by bisection on
    /// the membership oracle.
    fn gauge(&self, r: &[f64]) -> f64 {
        radial_gauge(|p| self.classify(p, 0.0).is_feasible(), r)
    }
}

pub(crate) fn radial_gauge<F>(mut feasible: F, r: &[f64]) -> f64
where
    F: FnMut(&[f64]) -> bool,
{
    let mut probe = r.to_vec();
    let mut at = |t: f64, probe: &mut Vec<f64>| {
        for (p, x) in probe.iter_mut().zip(r) {
            *p = t * x;
        }
        feasible(probe)
    };
    // find t_lo infeasible and t_hi feasible along the ray
    let (mut lo, mut hi) = (1.0, 1.0);
    if at(1.0, &mut probe) {
        while at(lo, &mut probe) {
            lo *= 0.5;
            if lo < 1e-300 {
                return f64::INFINITY;
            }
        }
    } else {
        while !at(hi, &mut probe) {
            hi *= 2.0;
            if hi > 1e300 {
                return 0.0;
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid, &mut probe) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    1.0 / hi
}

/// Closed-form families with a known trading set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Linear,
    ConstantMean,
    Quadratic,
    CoveredCallExpiry,
    BsCoveredCall,
    PerpetualPut,
    LogContract { k: f64 },
}

/// How a trading set was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    ClosedForm(Family),
    Traced,
    DeltaHedge,
    Imported,
}

#[derive(Clone, Debug)]
pub enum Shape {
    /// Two coins, explicit lower boundary.
    Curve(Arc<dyn BoundaryCurve>),
    /// A single reserve vector (linear payoff): no trade but the null trade.
    Point(Vec<f64>),
    /// Any number of coins, membership oracle only.
    Region(Arc<dyn Region>),
}

/// A convex feasible reserve set `S`.
#[derive(Clone, Debug)]
pub struct TradingSet {
    shape: Shape,
    provenance: Provenance,
}

impl TradingSet {
    pub fn from_curve(curve: Arc<dyn BoundaryCurve>, provenance: Provenance) -> Self {
        TradingSet { shape: Shape::Curve(curve), provenance }
    }

    pub fn from_point(point: Vec<f64>, provenance: Provenance) -> Self {
        TradingSet { shape: Shape::Point(point), provenance }
    }

    pub fn from_region(region: Arc<dyn Region>, provenance: Provenance) -> Self {
        TradingSet { shape: Shape::Region(region), provenance }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Curve(_) => 2,
            Shape::Point(p) => p.len(),
            Shape::Region(r) => r.dim(),
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn curve(&self) -> Option<&dyn BoundaryCurve> {
        match &self.shape {
            Shape::Curve(c) => Some(c.as_ref()),
            _ => None,
        }
    }

    /// Relative prices over which the set reproduces its target payoff.
    pub fn valid_prices(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Curve(c) => c.valid_prices(),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Classifies `r`; `tol` is absolute, scaled by `1 + |φ|` on curves.
    pub fn membership(&self, r: &[f64], tol: f64) -> Membership {
        if r.len() != self.dim() || r.iter().any(|&x| !(x >= -tol) || x.is_nan()) {
            return Membership::Outside;
        }
        match &self.shape {
            Shape::Curve(c) => curve_membership(c.as_ref(), r[0], r[1], tol),
            Shape::Point(p) => {
                let close = p.iter().zip(r).all(|(a, x)| (x - a).abs() <= tol * (1.0 + a.abs()));
                if close {
                    Membership::Boundary
                } else if p.iter().zip(r).all(|(a, x)| *x >= a - tol) {
                    Membership::Inside
                } else {
                    Membership::Outside
                }
            }
            Shape::Region(reg) => reg.classify(r, tol),
        }
    }

    /// The same set shifted by `a`: the trading set of `V(c) + aᵀc`.
    pub fn translated(&self, a: &[f64]) -> Result<TradingSet> {
        if a.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: a.len() });
        }
        let shape = match &self.shape {
            Shape::Curve(c) => Shape::Curve(Arc::new(Translated { inner: Arc::clone(c), shift: [a[0], a[1]] })),
            Shape::Point(p) => Shape::Point(p.iter().zip(a).map(|(x, y)| x + y).collect()),
            Shape::Region(reg) => {
                Shape::Region(Arc::new(TranslatedRegion { inner: Arc::clone(reg), shift: a.to_vec() }))
            }
        };
        Ok(TradingSet { shape, provenance: self.provenance })
    }
}

fn curve_membership(curve: &dyn BoundaryCurve, r1: f64, r2: f64, tol: f64) -> Membership {
    let (lo, hi) = curve.domain();
    if r1 < lo - tol {
        return Membership::Outside;
    }
    if r1 > hi && !curve.upward_closed() {
        return Membership::Outside;
    }
    let phi = curve.height(r1.clamp(lo, hi));
    if phi.is_nan() || phi == f64::INFINITY {
        return Membership::Outside;
    }
    let slack = r2 - phi;
    let band = tol * (1.0 + phi.abs());
    if slack < -band {
        Membership::Outside
    } else if slack <= band || (curve.upward_closed() && r1 - lo <= tol) {
        Membership::Boundary
    } else {
        Membership::Inside
    }
}

/// A boundary curve shifted by a fixed reserve vector.
#[derive(Debug, Clone)]
pub struct Translated {
    inner: Arc<dyn BoundaryCurve>,
    shift: [f64; 2],
}

impl BoundaryCurve for Translated {
    fn domain(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.domain();
        (lo + self.shift[0], hi + self.shift[0])
    }

    fn height(&self, r1: f64) -> f64 {
        self.inner.height(r1 - self.shift[0]) + self.shift[1]
    }

    fn slope(&self, r1: f64) -> f64 {
        self.inner.slope(r1 - self.shift[0])
    }

    fn valid_prices(&self) -> (f64, f64) {
        self.inner.valid_prices()
    }

    fn upward_closed(&self) -> bool {
        self.inner.upward_closed()
    }

    fn knots(&self) -> Option<Vec<(f64, f64)>> {
        let [dx, dy] = self.shift;
        self.inner.knots().map(|k| k.into_iter().map(|(x, y)| (x + dx, y + dy)).collect())
    }
}

#[derive(Debug, Clone)]
struct TranslatedRegion {
    inner: Arc<dyn Region>,
    shift: Vec<f64>,
}

impl Region for TranslatedRegion {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn classify(&self, r: &[f64], tol: f64) -> Membership {
        let shifted: Vec<f64> = r.iter().zip(&self.shift).map(|(x, a)| x - a).collect();
        self.inner.classify(&shifted, tol)
    }
}
