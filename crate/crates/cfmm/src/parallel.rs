//! Rayon versions of the round-trip and Monte-Carlo drivers.
//!
//! Work is split across threads but collected and reduced in input order, so
//! results are bit-identical to the sequential functions in `cfmm-core`.

use cfmm_core::sim::{path_record, pool_value, summarize, GapStats, PathRecord, PathSpec};
use cfmm_core::verify::{round_trip_row, RoundTripReport};
use cfmm_core::{Payoff, PriceVector, Result, TradingSet};
use rayon::prelude::*;

pub type Holdings<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

pub fn round_trip(v: &dyn Payoff, set: &TradingSet, grid: &[PriceVector], bound: f64) -> RoundTripReport {
    let rows = grid.par_iter().map(|c| round_trip_row(v, set, c)).collect();
    RoundTripReport::from_rows(rows, bound)
}

pub fn run_paths(set: &TradingSet, holdings: Option<Holdings<'_>>, spec: &PathSpec) -> Result<Vec<PathRecord>> {
    spec.validate()?;
    let v0 = pool_value(set, spec.c0)?;
    (0..spec.paths)
        .into_par_iter()
        .map(|i| path_record(set, holdings.map(|h| h as &dyn Fn(f64) -> f64), spec, i, v0))
        .collect()
}

/// Summary statistics and the per-path ledger.
pub fn simulate(
    set: &TradingSet,
    holdings: Option<Holdings<'_>>,
    spec: &PathSpec,
) -> Result<(GapStats, Vec<PathRecord>)> {
    let records = run_paths(set, holdings, spec)?;
    let stats = summarize(set, spec, &records)?;
    Ok((stats, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cfmm_core::closed_forms::{
        bs_covered_call_boundary, log_contract_boundary, BsCoveredCallParams, LogContractParams,
    };
    use cfmm_core::sim;
    use cfmm_core::verify::{self, relative_grid};

    #[test]
    fn round_trip_matches_sequential() {
        let p = BsCoveredCallParams::new(1.0, 0.2, 10.0).unwrap();
        let set = bs_covered_call_boundary(&p);
        let grid = relative_grid(1e-3, 1e3, 200).unwrap();
        let par = round_trip(&p, &set, &grid, 1e-5);
        let seq = verify::round_trip(&p, &set, &grid, 1e-5);
        assert_eq!(par, seq);
    }

    #[test]
    fn simulation_matches_sequential() {
        let set = log_contract_boundary(&LogContractParams::new(2.0).unwrap());
        let spec = PathSpec { sigma: 0.2, horizon: 1.0, steps: 20, paths: 3000, seed: 11, c0: 1.0 };
        let hedge = |c: f64| 1.0 / c;
        let (stats, records) = simulate(&set, Some(&hedge), &spec).unwrap();
        let seq_records = sim::run_paths(&set, Some(&hedge), &spec).unwrap();
        assert_eq!(records, seq_records);
        assert_eq!(stats, sim::summarize(&set, &spec, &seq_records).unwrap());
        assert_eq!(stats, sim::rebalance_vs_cfmm_gap(hedge, &set, &spec).unwrap());
    }
}
