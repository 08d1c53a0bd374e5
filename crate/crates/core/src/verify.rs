//! The forward problem `V*(c) = inf { cᵀR | R ∈ S }` and round-trip checks.

use alloc::vec::Vec;

use crate::conjugate::{BoundaryCurve, Region, Shape, TradingSet};
use crate::minimize::{bracket_minimum, golden_section, minimize_on_simplex, simplex_resolution};
use crate::payoff::{check_dim, dot, Payoff, PriceVector};
use crate::{Error, Reserves, Result};

/// Default bound on the round-trip relative error.
pub const ROUND_TRIP_BOUND: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardSolution {
    /// `cᵀR*` in numéraire units.
    pub value: f64,
    pub argmin: Reserves,
    /// Objective evaluations spent.
    pub iterations: usize,
    /// Upper bound on `value − V*(c)`.
    pub gap_estimate: f64,
}

/// Solves the arbitrage problem on `set` at prices `c`.
///
/// Two coins: golden-section search of the convex `c₁R₁ + c₂φ(R₁)` over the
/// boundary domain, reparameterized so either end of the domain is reachable
/// to full precision, with both endpoints checked exactly. More coins: the
/// gauge `f` of the set is maximized over `{ d | cᵀd = 1 }`; the optimum
/// `d*/f(d*)` gives the value, and the tangent plane of `f` at it a lower
/// bound.
pub fn portfolio_value(set: &TradingSet, c: &PriceVector) -> Result<ForwardSolution> {
    check_dim(set.dim(), c.len())?;
    if !c.is_strictly_positive() {
        return Err(Error::NonPositivePrice(c.to_vec()));
    }
    // solve on the simplex; the value is 1-homogeneous in c
    let total: f64 = c.iter().sum();
    let unit: Vec<f64> = c.iter().map(|x| x / total).collect();
    let mut sol = match set.shape() {
        Shape::Point(p) => ForwardSolution {
            value: dot(&unit, p),
            argmin: Reserves::new(p.clone())?,
            iterations: 0,
            gap_estimate: 0.0,
        },
        Shape::Curve(curve) => solve_curve(curve.as_ref(), unit[0], unit[1])?,
        Shape::Region(region) => solve_region(region.as_ref(), &unit)?,
    };
    sol.value = dot(c, &sol.argmin);
    sol.gap_estimate *= total;
    if !sol.value.is_finite() {
        return Err(Error::Unbounded);
    }
    Ok(sol)
}

fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + libm::exp(-u))
    } else {
        let e = libm::exp(u);
        e / (1.0 + e)
    }
}

fn solve_curve(curve: &dyn BoundaryCurve, c1: f64, c2: f64) -> Result<ForwardSolution> {
    let (lo, hi) = curve.domain();
    let width = hi - lo;
    let at = |u: f64| -> f64 {
        if hi.is_infinite() {
            lo + libm::exp(u)
        } else if u >= 0.0 {
            hi - width * logistic(-u)
        } else {
            lo + width * logistic(u)
        }
    };
    let objective = |r1: f64| -> f64 {
        let h = curve.height(r1);
        if h.is_nan() || h == f64::INFINITY {
            f64::INFINITY
        } else {
            c1 * r1 + c2 * h
        }
    };
    let limits = (-745.0, if hi.is_infinite() { 709.0 } else { 745.0 });
    let mut evals = 0usize;
    let mut g = |u: f64| {
        evals += 1;
        objective(at(u))
    };
    let (a, b) = bracket_minimum(&mut g, 0.0, 1.0, limits);
    let m = golden_section(&mut g, a, b, 1e-12, 400);
    let mut r1 = at(m.x);
    let mut best = objective(r1);
    for end in [lo, hi] {
        if end.is_finite() {
            let v = objective(end);
            if v <= best {
                best = v;
                r1 = end;
            }
        }
    }
    if !best.is_finite() {
        return Err(if best == f64::NEG_INFINITY { Error::Unbounded } else { Error::NoBoundary });
    }
    let r2 = curve.height(r1);
    Ok(ForwardSolution {
        value: best,
        argmin: Reserves::new(alloc::vec![r1, r2])?,
        iterations: evals + 2,
        gap_estimate: m.spread.max(0.0),
    })
}

fn solve_region(region: &dyn Region, c: &[f64]) -> Result<ForwardSolution> {
    let n = c.len();
    let mut evals = 0usize;
    let mut d = alloc::vec![0.0; n];
    let (x, neg_f) = minimize_on_simplex(
        |x| {
            evals += 1;
            for i in 0..n {
                d[i] = x[i] / c[i];
            }
            -region.gauge(&d)
        },
        n,
        simplex_resolution(n),
    );
    let f = -neg_f;
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::NoBoundary);
    }
    let argmin: Vec<f64> = x.iter().zip(c).map(|(xi, ci)| xi / ci / f).collect();

    // tangent plane ν at R*: S ⊆ { νᵀR ≥ 1 }, so cᵀR ≥ min cᵢ/νᵢ on S
    let mut nu = Vec::with_capacity(n);
    let mut probe = argmin.clone();
    for i in 0..n {
        let h = 1e-6 * argmin[i].abs().max(1e-6);
        probe[i] = argmin[i] + h;
        let up = region.gauge(&probe);
        probe[i] = (argmin[i] - h).max(0.0);
        let down = region.gauge(&probe);
        let step = argmin[i] + h - probe[i];
        probe[i] = argmin[i];
        nu.push(((up - down) / step).max(0.0));
    }
    let norm = dot(&nu, &argmin);
    let value = dot(c, &argmin);
    let lower = if norm > 0.0 {
        c.iter()
            .zip(&nu)
            .map(|(ci, vi)| if *vi > 0.0 { ci * norm / vi } else { f64::INFINITY })
            .fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    Ok(ForwardSolution {
        value,
        argmin: Reserves::new(argmin.iter().map(|x| x.max(0.0)).collect())?,
        iterations: evals,
        gap_estimate: (value - lower.min(value)).max(0.0),
    })
}

/// `−dφ/dR₁`: the relative price at which `R₁` is the optimal holding.
pub fn marginal_price(set: &TradingSet, r1: f64) -> Result<f64> {
    let curve = set.curve().ok_or(Error::NoBoundary)?;
    let (lo, hi) = curve.domain();
    if !(r1 > lo && r1 < hi) {
        return Err(Error::Domain { what: "R1", value: r1, lo, hi });
    }
    Ok(-curve.slope(r1))
}

/// Prices `(ρ, 1)` for `ρ` log-spaced over `[lo, hi]`.
pub fn relative_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<PriceVector>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || points < 1 {
        return Err(Error::InvalidParameter(alloc::format!(
            "relative grid needs 0 < lo <= hi and a point, got [{lo}, {hi}] x {points}"
        )));
    }
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..points)
        .map(|i| {
            let t = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
            let rho = if i == 0 {
                lo
            } else if i + 1 == points {
                hi
            } else {
                libm::exp(a + t * (b - a))
            };
            PriceVector::relative(rho)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTripRow {
    pub c: Vec<f64>,
    pub target: f64,
    pub forward: f64,
    pub abs_error: f64,
    /// `|forward − target| / (1 + |target|)`.
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTripReport {
    pub rows: Vec<RoundTripRow>,
    pub max_rel_error: f64,
    pub bound: f64,
    pub pass: bool,
}

impl RoundTripReport {
    pub fn from_rows(rows: Vec<RoundTripRow>, bound: f64) -> Self {
        let max_rel_error =
            rows.iter().map(|r| if r.rel_error.is_nan() { f64::INFINITY } else { r.rel_error }).fold(0.0, f64::max);
        RoundTripReport { pass: max_rel_error <= bound, rows, max_rel_error, bound }
    }

    /// Rows beyond the bound.
    pub fn failures(&self) -> impl Iterator<Item = &RoundTripRow> {
        self.rows.iter().filter(move |r| !(r.rel_error <= self.bound))
    }
}

/// One row of a round trip; solver failures become infinite errors.
pub fn round_trip_row(v: &dyn Payoff, set: &TradingSet, c: &PriceVector) -> RoundTripRow {
    let target = v.value(c).to_f64();
    let forward = portfolio_value(set, c).map(|s| s.value).unwrap_or(f64::NAN);
    let abs_error = (forward - target).abs();
    let rel_error = if abs_error.is_finite() { abs_error / (1.0 + target.abs()) } else { f64::INFINITY };
    RoundTripRow { c: c.to_vec(), target, forward, abs_error, rel_error }
}

/// Compares the forward value of `set` with the payoff `v` over `grid`.
pub fn round_trip(v: &dyn Payoff, set: &TradingSet, grid: &[PriceVector], bound: f64) -> RoundTripReport {
    let rows = grid.iter().map(|c| round_trip_row(v, set, c)).collect();
    RoundTripReport::from_rows(rows, bound)
}
