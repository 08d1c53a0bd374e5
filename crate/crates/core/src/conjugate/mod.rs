//! From a payoff to its trading set.
//!
//! For a consistent payoff `V`, any supergradient `R ∈ ∂V(c)` satisfies
//! `cᵀR = V(c)` and belongs to the feasible reserve set
//! `S = { R ≥ 0 | cᵀR ≥ V(c) for all c }`. Sweeping `c` over the price
//! simplex therefore traces the boundary of `S`, and the signed gap
//! `inf_c (cᵀR − V(c))` decides membership for any `R`.

mod curve;
mod indicator;
mod set;
mod trace;

use alloc::vec::Vec;
use core::ops::Deref;

use crate::{Error, Result};

pub use curve::{Node, TracedCurve};
pub use indicator::{membership_gap, payoff_region, psi_indicator, TradingFunction};
pub use set::{BoundaryCurve, Family, Provenance, Region, Shape, TradingSet, Translated};
pub use trace::{price_grid, reserves_on_boundary, trace_boundary, trace_boundary_with, GridSpec, TraceOptions};

/// Absolute membership tolerance on the simplex-normalized gap.
pub const MEMBERSHIP_TOL: f64 = 1e-7;

/// Pool holdings, one nonnegative quantity per coin.
#[derive(Debug, Clone, PartialEq)]
pub struct Reserves(Vec<f64>);

impl Reserves {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&r| !(r.is_finite() && r >= 0.0)) {
            return Err(Error::InvalidParameter(alloc::format!(
                "reserves must be finite and nonnegative, got {values:?}"
            )));
        }
        Ok(Reserves(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Reserves {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Where a reserve vector sits relative to a trading set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

impl Membership {
    /// Inside or on the boundary.
    pub fn is_feasible(self) -> bool {
        !matches!(self, Membership::Outside)
    }
}
