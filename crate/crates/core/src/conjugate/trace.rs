use alloc::sync::Arc;
use alloc::vec::Vec;

use super::curve::{Node, TracedCurve};
use super::set::{Provenance, TradingSet};
use super::Reserves;
use crate::payoff::{check_dim, default_fd_step, dot, fd_gradient, finite_value, Payoff, PriceVector};
use crate::{Error, Result};

/// Log-spaced relative prices `c₁/c₂`, placed on the unit simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { ratio_min: 1e-4, ratio_max: 1e4, points: 512 }
    }
}

impl GridSpec {
    pub fn prices(&self) -> Result<Vec<PriceVector>> {
        price_grid(self.ratio_min, self.ratio_max, self.points)
    }
}

pub fn price_grid(ratio_min: f64, ratio_max: f64, points: usize) -> Result<Vec<PriceVector>> {
    if !(ratio_min > 0.0 && ratio_max > ratio_min && ratio_max.is_finite()) || points < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "price grid needs 0 < min < max and at least 2 points, got [{ratio_min}, {ratio_max}] x {points}"
        )));
    }
    let (lo, hi) = (libm::log(ratio_min), libm::log(ratio_max));
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            PriceVector::on_simplex(libm::exp(lo + t * (hi - lo)))
        })
        .collect()
}

/// Knobs for [`trace_boundary_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Largest allowed gap between chord and supporting lines of an interval,
    /// relative to the local portfolio value.
    pub refine_tol: f64,
    /// Traced points closer than this (relative) are merged.
    pub merge_tol: f64,
    /// Slack for monotonicity of the traced points.
    pub monotone_tol: f64,
    pub max_nodes: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { refine_tol: 1e-8, merge_tol: 1e-9, monotone_tol: 1e-7, max_nodes: 1 << 16 }
    }
}

/// A supergradient `R ∈ ∂V(c)`, checked for `cᵀR = V(c)`.
///
/// Uses the payoff's analytic supergradient when it has one and central
/// differences otherwise; the tightness tolerance is `1e-9` or `1e-6`
/// relative accordingly.
pub fn reserves_on_boundary(v: &dyn Payoff, c: &PriceVector) -> Result<Reserves> {
    check_dim(v.dim(), c.len())?;
    if !c.is_strictly_positive() {
        return Err(Error::NonPositivePrice(c.to_vec()));
    }
    let value = finite_value(v, c)?;
    let (mut r, tol) = match v.supergradient(c) {
        Some(g) => (g, 1e-9),
        None => (fd_gradient(v, c, default_fd_step(c))?, 1e-6),
    };
    check_dim(c.len(), r.len())?;
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(r));
    }
    let dot = dot(c, &r);
    if (dot - value).abs() > tol * (1.0 + value.abs()) {
        return Err(Error::NotTight { dot, value });
    }
    for x in r.iter_mut() {
        if *x < 0.0 {
            if *x < -tol * (1.0 + value.abs()) {
                return Err(Error::Inconsistent(alloc::format!(
                    "negative supergradient component {x} at {:?}",
                    c.as_slice()
                )));
            }
            *x = 0.0;
        }
    }
    Reserves::new(r)
}

/// Traces the two-coin boundary of `S` from supergradients over `grid`,
/// with default [`TraceOptions`].
pub fn trace_boundary(v: &dyn Payoff, grid: &[PriceVector]) -> Result<TradingSet> {
    trace_boundary_with(v, grid, &TraceOptions::default())
}

#[derive(Debug, Clone, Copy)]
struct Work {
    r1: f64,
    r2: f64,
    rho_hi: f64,
    rho_lo: f64,
}

/// Traces the boundary, then bisects in price wherever the chord and the
/// supporting lines of an interval are further apart than `refine_tol`.
///
/// Points selected by a whole price range (vertices of the set) are kept once
/// with that range. A payoff whose every supergradient coincides yields a
/// single-point set.
pub fn trace_boundary_with(v: &dyn Payoff, grid: &[PriceVector], opts: &TraceOptions) -> Result<TradingSet> {
    check_dim(2, v.dim())?;
    if grid.len() < 2 {
        return Err(Error::InvalidParameter("trace needs at least 2 grid prices".into()));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for c in grid {
        check_dim(2, c.len())?;
        let r = reserves_on_boundary(v, c)?;
        samples.push((c[0] / c[1], r[0], r[1]));
    }
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let valid = (samples[samples.len() - 1].0, samples[0].0);

    let mut nodes: Vec<Work> = Vec::with_capacity(samples.len());
    for &(rho, r1, r2) in &samples {
        match nodes.last_mut() {
            Some(last) => {
                if let Some(node) = place(last, None, rho, r1, r2, opts)? {
                    nodes.push(node);
                }
            }
            None => nodes.push(Work { r1, r2, rho_hi: rho, rho_lo: rho }),
        }
    }

    loop {
        let mut changed = false;
        let mut out: Vec<Work> = Vec::with_capacity(2 * nodes.len());
        out.push(nodes[0]);
        for i in 1..nodes.len() {
            let mut b = nodes[i];
            let budget = out.len() + nodes.len() - i < opts.max_nodes;
            let a = out.last_mut().expect("nonempty");
            if budget && needs_refine(a, &b, opts.refine_tol) {
                let rho = libm::sqrt(a.rho_lo * b.rho_hi);
                let r = reserves_on_boundary(v, &PriceVector::on_simplex(rho)?)?;
                changed = true;
                if let Some(node) = place(a, Some(&mut b), rho, r[0], r[1], opts)? {
                    out.push(node);
                }
            }
            out.push(b);
        }
        nodes = out;
        if !changed {
            break;
        }
    }

    if nodes.len() == 1 {
        return Ok(TradingSet::from_point(alloc::vec![nodes[0].r1, nodes[0].r2], Provenance::Traced));
    }
    let nodes: Vec<Node> =
        nodes.iter().map(|w| Node { r1: w.r1, r2: w.r2, support_left: -w.rho_hi, support_right: -w.rho_lo }).collect();
    let curve = TracedCurve::from_nodes(&nodes, valid)?;
    Ok(TradingSet::from_curve(Arc::new(curve), Provenance::Traced))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Files a point traced at price `rho`, which lies below `a`'s prices and
/// above `b`'s. Returns a new node unless it merged into a neighbour.
fn place(
    a: &mut Work,
    b: Option<&mut Work>,
    rho: f64,
    r1: f64,
    mut r2: f64,
    opts: &TraceOptions,
) -> Result<Option<Work>> {
    if close(a.r1, r1, opts.merge_tol) && close(a.r2, r2, opts.merge_tol) {
        a.rho_lo = rho;
        return Ok(None);
    }
    let slack = |x: f64| opts.monotone_tol * (1.0 + x.abs());
    if r1 < a.r1 - slack(a.r1) || r2 > a.r2 + slack(a.r2) {
        return Err(Error::NonMonotone { r1 });
    }
    if r1 <= a.r1 {
        a.rho_lo = rho;
        return Ok(None);
    }
    r2 = r2.min(a.r2);
    if let Some(b) = b {
        if close(b.r1, r1, opts.merge_tol) && close(b.r2, r2, opts.merge_tol) {
            b.rho_hi = rho;
            return Ok(None);
        }
        if r1 > b.r1 + slack(b.r1) || r2 < b.r2 - slack(b.r2) {
            return Err(Error::NonMonotone { r1 });
        }
        if r1 >= b.r1 {
            b.rho_hi = rho;
            return Ok(None);
        }
        r2 = r2.max(b.r2);
    }
    Ok(Some(Work { r1, r2, rho_hi: rho, rho_lo: rho }))
}

/// Worst vertical distance between the chord from `a` to `b` and the lower
/// envelope of their supporting lines, compared with `tol` times the local
/// portfolio value.
fn needs_refine(a: &Work, b: &Work, tol: f64) -> bool {
    if !(a.rho_lo > b.rho_hi * (1.0 + 1e-12)) {
        return false;
    }
    let (x0, y0, s0) = (a.r1, a.r2, -a.rho_lo);
    let (x1, y1, s1) = (b.r1, b.r2, -b.rho_hi);
    let gap = if s1 > s0 {
        let x = ((y1 - y0 + s0 * x0 - s1 * x1) / (s0 - s1)).clamp(x0, x1);
        let chord = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        (chord - (y0 + s0 * (x - x0))).max(0.0)
    } else {
        0.0
    };
    let rho = libm::sqrt(a.rho_lo * b.rho_hi);
    let scale = 1.0 + 0.5 * (y0 + y1) + 0.5 * rho * (x0 + x1);
    gap > tol * scale
}
