//! Payoff → trading set → exported boundary, shared by the CLI and tests.

use cfmm_core::conjugate::{payoff_region, trace_boundary_with, GridSpec, Shape, TraceOptions};
use cfmm_core::payoff::{check_consistency, supergradient_fd, ConsistencyReport, SamplingSpec};
use cfmm_core::verify::portfolio_value;
use cfmm_core::{Error as CoreError, Payoff, PayoffRef, PriceVector, TradingSet};

use crate::config::BuiltPayoff;
use crate::error::{Error, Result};
use crate::fmt::num;

/// Relative tolerance for the sampled consistency axioms.
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Construction {
    /// The generic construction for consistent payoffs, else the closed form.
    #[default]
    Auto,
    /// Supergradients of the payoff on a price grid.
    Traced,
    /// The family's analytic trading set.
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceSettings {
    pub grid: GridSpec,
    pub options: TraceOptions,
}

#[derive(Debug, Clone)]
pub struct Constructed {
    pub set: TradingSet,
    /// `traced`, `closed_form` or `region`.
    pub construction: &'static str,
    pub consistency: Option<ConsistencyReport>,
}

pub fn consistency(v: &dyn Payoff) -> Result<ConsistencyReport> {
    Ok(check_consistency(v, &SamplingSpec::default(), CONSISTENCY_TOL)?)
}

/// One line per failed axiom.
pub fn describe_failures(report: &ConsistencyReport) -> Vec<String> {
    [
        ("concavity", &report.concave),
        ("nonnegativity", &report.nonnegative),
        ("monotonicity", &report.nondecreasing),
        ("1-homogeneity", &report.one_homogeneous),
    ]
    .into_iter()
    .filter(|(_, r)| !r.passed)
    .map(|(name, r)| format!("{name} violated (worst relative violation {})", num(r.worst_violation)))
    .collect()
}

fn traced(payoff: &PayoffRef, trace: &TraceSettings) -> Result<TradingSet> {
    if payoff.dim() == 2 {
        Ok(trace_boundary_with(payoff.as_ref(), &trace.grid.prices()?, &trace.options)?)
    } else {
        Ok(payoff_region(payoff.clone()))
    }
}

/// Builds the trading set of `built`.
///
/// `Auto` traces consistent payoffs and falls back to the closed form
/// otherwise; with `prefer_closed` it takes the closed form whenever there is
/// one, which is much cheaper to evaluate.
pub fn construct(
    built: &BuiltPayoff,
    how: Construction,
    trace: &TraceSettings,
    prefer_closed: bool,
) -> Result<Constructed> {
    let closed = || -> Result<Constructed> {
        let set = built.closed.clone().ok_or_else(|| Error::config("this family has no closed-form trading set"))?;
        Ok(Constructed { set, construction: "closed_form", consistency: None })
    };
    match how {
        Construction::Closed => closed(),
        Construction::Auto if prefer_closed && built.closed.is_some() => closed(),
        Construction::Traced | Construction::Auto => {
            let report = consistency(built.payoff.as_ref())?;
            if !report.passed() {
                if how == Construction::Auto && built.closed.is_some() {
                    log::warn!(
                        "payoff is not consistent ({}); using its closed form",
                        describe_failures(&report).join("; ")
                    );
                    let mut out = closed()?;
                    out.consistency = Some(report);
                    return Ok(out);
                }
                return Err(CoreError::Inconsistent(describe_failures(&report).join("; ")).into());
            }
            let set = traced(&built.payoff, trace)?;
            let construction = if built.payoff.dim() == 2 { "traced" } else { "region" };
            Ok(Constructed { set, construction, consistency: Some(report) })
        }
    }
}

/// Points on the lower boundary of a two-coin set, increasing in `R₁`.
///
/// Tabulated curves give their knots; analytic curves are sampled at the
/// forward-problem optimum for each grid price.
pub fn boundary_points(set: &TradingSet, grid: &[PriceVector]) -> Result<Vec<(f64, f64)>> {
    match set.shape() {
        Shape::Point(p) if p.len() == 2 => Ok(vec![(p[0], p[1])]),
        Shape::Curve(curve) => {
            if let Some(knots) = curve.knots() {
                return Ok(knots);
            }
            let mut points = Vec::with_capacity(grid.len());
            for c in grid {
                let r = portfolio_value(set, c)?.argmin;
                points.push((r[0], r[1]));
            }
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            points.dedup_by(|b, a| b.0 <= a.0 * (1.0 + 1e-12) + 1e-300);
            Ok(points)
        }
        _ => Err(CoreError::NoBoundary.into()),
    }
}

/// Optimal holdings of the traded coin at relative price `c`: the payoff's
/// supergradient, by central differences when there is no closed form.
pub fn holdings(payoff: &PayoffRef) -> impl Fn(f64) -> f64 + Sync + '_ {
    move |c: f64| {
        let at = [c, 1.0];
        match payoff.supergradient(&at) {
            Some(g) => g[0],
            None => PriceVector::new(at.to_vec())
                .and_then(|p| supergradient_fd(payoff.as_ref(), &p, 1e-6 * c.min(1.0)))
                .map(|r| r[0])
                .unwrap_or(f64::NAN),
        }
    }
}
