//! Monte-Carlo replication experiments on a two-coin trading set.
//!
//! The traded coin follows zero-drift geometric Brownian motion with the
//! numéraire fixed at 1. A CFMM's terminal value depends only on the final
//! price, while a delta hedge rebalanced at every step is path-dependent; the
//! difference between the two is the theta a no-fee CFMM gives away.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::conjugate::{Family, Provenance, TradingSet};
use crate::payoff::PriceVector;
use crate::verify::portfolio_value;
use crate::{Error, Result};

/// Largest tolerated fraction of paths leaving the set's valid prices.
pub const MAX_EXCLUDED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub sigma: f64,
    /// Horizon `T`.
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub c0: f64,
}

impl PathSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.steps < 1 {
            return bad("steps must be at least 1");
        }
        if self.paths < 1 {
            return bad("paths must be at least 1");
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be nonnegative");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be positive");
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return bad("initial price must be positive");
        }
        Ok(())
    }
}

/// Path `index` of the ensemble: `steps + 1` prices starting at `c0`.
///
/// Each path draws from its own ChaCha stream, so it does not depend on which
/// other paths are simulated or in what order.
pub fn simulate_path(spec: &PathSpec, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let dt = spec.horizon / spec.steps as f64;
    let drift = -0.5 * spec.sigma * spec.sigma * dt;
    let vol = spec.sigma * libm::sqrt(dt);
    let mut path = Vec::with_capacity(spec.steps + 1);
    let mut c = spec.c0;
    path.push(c);
    for _ in 0..spec.steps {
        let z: f64 = rng.sample(StandardNormal);
        c *= libm::exp(drift + vol * z);
        path.push(c);
    }
    path
}

pub fn simulate_paths(spec: &PathSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    Ok((0..spec.paths).map(|i| simulate_path(spec, i)).collect())
}

/// LP value `V(c) = inf { cR₁ + R₂ | R ∈ S }` at relative price `c`.
pub fn pool_value(set: &TradingSet, c: f64) -> Result<f64> {
    Ok(portfolio_value(set, &PriceVector::relative(c)?)?.value)
}

/// `V(c_T) − V(c_0)`: only the endpoints of the path matter.
pub fn cfmm_pnl(set: &TradingSet, path: &[f64]) -> Result<f64> {
    let (first, last) = endpoints(path)?;
    Ok(pool_value(set, last)? - pool_value(set, first)?)
}

/// `Σ R₁(c_t)(c_{t+1} − c_t)`: self-financed rebalancing at every step.
pub fn rebalancing_pnl<H: Fn(f64) -> f64>(holdings: H, path: &[f64]) -> f64 {
    path.windows(2).map(|w| holdings(w[0]) * (w[1] - w[0])).sum()
}

fn endpoints(path: &[f64]) -> Result<(f64, f64)> {
    match (path.first(), path.last()) {
        (Some(&a), Some(&b)) => Ok((a, b)),
        _ => Err(Error::InvalidParameter("empty path".into())),
    }
}

/// Outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRecord {
    pub index: usize,
    pub terminal_price: f64,
    /// `None` when the path left the set's valid prices.
    pub cfmm_pnl: Option<f64>,
    pub rebal_pnl: Option<f64>,
}

/// Simulates path `index` and values it; `v0` is the pool value at `c0`.
pub fn path_record(
    set: &TradingSet,
    holdings: Option<&dyn Fn(f64) -> f64>,
    spec: &PathSpec,
    index: usize,
    v0: f64,
) -> Result<PathRecord> {
    let path = simulate_path(spec, index);
    let terminal_price = path[path.len() - 1];
    let (lo, hi) = set.valid_prices();
    if path.iter().any(|&c| !(c >= lo && c <= hi)) {
        return Ok(PathRecord { index, terminal_price, cfmm_pnl: None, rebal_pnl: None });
    }
    let cfmm = pool_value(set, terminal_price)? - v0;
    let rebal = holdings.map(|h| rebalancing_pnl(h, &path));
    Ok(PathRecord { index, terminal_price, cfmm_pnl: Some(cfmm), rebal_pnl: rebal })
}

/// All path records in index order.
pub fn run_paths(set: &TradingSet, holdings: Option<&dyn Fn(f64) -> f64>, spec: &PathSpec) -> Result<Vec<PathRecord>> {
    spec.validate()?;
    let v0 = pool_value(set, spec.c0)?;
    (0..spec.paths).map(|i| path_record(set, holdings, spec, i, v0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnLSummary {
    pub mean_pnl: f64,
    pub std_error: f64,
    pub mean_terminal_value: f64,
    /// Expected PnL when known in closed form.
    pub theoretical: Option<f64>,
    pub z_score: Option<f64>,
    pub samples: usize,
    pub excluded: usize,
}

impl PnLSummary {
    /// `|z| ≤ limit`, or true when there is nothing to compare against.
    pub fn within(&self, limit: f64) -> bool {
        self.z_score.is_none_or(|z| z.abs() <= limit)
    }
}

/// Rebalanced hedge against the CFMM on common noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapStats {
    pub rebalancing: PnLSummary,
    pub cfmm: PnLSummary,
    /// Mean of `rebalancing − cfmm` per path.
    pub mean_gap: f64,
    pub gap_std_error: f64,
    /// Sample variance of the per-path gap.
    pub paired_variance: f64,
    /// `Var(rebalancing) + Var(cfmm)`: the gap variance without pairing.
    pub unpaired_variance: f64,
}

#[derive(Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        }
    }

    fn std_error(&self) -> f64 {
        if self.n > 0 {
            libm::sqrt(self.variance() / self.n as f64)
        } else {
            f64::NAN
        }
    }
}

fn summary(m: &Moments, mean_terminal_value: f64, theoretical: Option<f64>, excluded: usize) -> PnLSummary {
    let std_error = m.std_error();
    let z_score = theoretical.map(|t| {
        let d = m.mean - t;
        if std_error > 0.0 {
            d / std_error
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    });
    PnLSummary { mean_pnl: m.mean, std_error, mean_terminal_value, theoretical, z_score, samples: m.n, excluded }
}

/// Expected CFMM PnL, known for the log contract: `E[ln c_T − ln c_0] = −σ²T/2`.
pub fn theoretical_cfmm_pnl(set: &TradingSet, spec: &PathSpec) -> Option<f64> {
    match set.provenance() {
        Provenance::ClosedForm(Family::LogContract { .. }) => Some(-0.5 * spec.sigma * spec.sigma * spec.horizon),
        _ => None,
    }
}

fn check_excluded(excluded: usize, paths: usize) -> Result<()> {
    if excluded as f64 > MAX_EXCLUDED_FRACTION * paths as f64 {
        return Err(Error::TooManyExcluded { excluded, paths });
    }
    Ok(())
}

/// Aggregates records in index order into CFMM and rebalancing summaries.
pub fn summarize(set: &TradingSet, spec: &PathSpec, records: &[PathRecord]) -> Result<GapStats> {
    let v0 = pool_value(set, spec.c0)?;
    let excluded = records.iter().filter(|r| r.cfmm_pnl.is_none()).count();
    check_excluded(excluded, records.len())?;
    let (mut cfmm, mut rebal, mut gap) = (Moments::default(), Moments::default(), Moments::default());
    for r in records {
        if let Some(pnl) = r.cfmm_pnl {
            cfmm.push(pnl);
            if let Some(h) = r.rebal_pnl {
                rebal.push(h);
                gap.push(h - pnl);
            }
        }
    }
    let cfmm_summary = summary(&cfmm, v0 + cfmm.mean, theoretical_cfmm_pnl(set, spec), excluded);
    let rebal_summary = summary(&rebal, v0 + rebal.mean, Some(0.0), excluded);
    Ok(GapStats {
        rebalancing: rebal_summary,
        cfmm: cfmm_summary,
        mean_gap: gap.mean,
        gap_std_error: gap.std_error(),
        paired_variance: gap.variance(),
        unpaired_variance: rebal.variance() + cfmm.variance(),
    })
}

/// Mean LP PnL `V(c_T) − V(c_0)` over the ensemble.
pub fn cfmm_replication_pnl(set: &TradingSet, spec: &PathSpec) -> Result<PnLSummary> {
    let records = run_paths(set, None, spec)?;
    Ok(summarize(set, spec, &records)?.cfmm)
}

/// CFMM PnL against rebalancing to `holdings` at every step, on the same
/// paths.
pub fn rebalance_vs_cfmm_gap<H: Fn(f64) -> f64>(holdings: H, set: &TradingSet, spec: &PathSpec) -> Result<GapStats> {
    let records = run_paths(set, Some(&holdings), spec)?;
    summarize(set, spec, &records)
}
