use alloc::sync::Arc;
use alloc::vec::Vec;

use super::set::{radial_gauge, Provenance, Region, TradingSet};
use super::{Membership, MEMBERSHIP_TOL};
use crate::minimize::{golden_section, minimize_on_simplex, simplex_resolution};
use crate::payoff::{check_dim, dot, Payoff, PayoffRef};
use crate::{Extended, Result};

fn gap_term(v: &dyn Payoff, c: &[f64], r: &[f64]) -> f64 {
    match v.value(c) {
        Extended::Finite(x) => dot(c, r) - x,
        Extended::NegInf => f64::INFINITY,
        Extended::PosInf => f64::NEG_INFINITY,
    }
}

/// `inf_c (cᵀR − V(c))` over the price simplex.
///
/// Zero on the boundary of `S`, positive inside and negative outside; `V = −∞`
/// contributes nothing to the infimum.
pub fn membership_gap(v: &dyn Payoff, r: &[f64]) -> Result<f64> {
    check_dim(v.dim(), r.len())?;
    let n = r.len();
    if n == 2 {
        let mut c = [0.0; 2];
        let m = golden_section(
            |t| {
                c = [t, 1.0 - t];
                gap_term(v, &c, r)
            },
            0.0,
            1.0,
            1e-14,
            400,
        );
        return Ok(m.value);
    }
    let (_, value) = minimize_on_simplex(|c| gap_term(v, c, r), n, simplex_resolution(n));
    Ok(value)
}

/// The indicator trading function `ψ_V`, or an explicit invariant for the
/// families that have one.
#[derive(Debug, Clone)]
pub enum TradingFunction {
    /// `ψ(R) = 0` if `R − shift ∈ S`, `−∞` otherwise, with `S` the feasible
    /// set of `payoff`.
    Indicator { payoff: PayoffRef, shift: Option<Vec<f64>>, tol: f64 },
    /// `ψ(R) = ∏ (Rᵢ/wᵢ)^wᵢ` with level 1.
    ConstantMean { weights: Vec<f64> },
}

impl TradingFunction {
    pub fn level(&self) -> f64 {
        match self {
            TradingFunction::Indicator { .. } => 0.0,
            TradingFunction::ConstantMean { .. } => 1.0,
        }
    }

    /// Signed gap of the underlying feasible set; `None` for explicit
    /// invariants.
    pub fn gap(&self, r: &[f64]) -> Option<Result<f64>> {
        match self {
            TradingFunction::Indicator { payoff, shift, .. } => Some(match shift {
                Some(a) => {
                    let shifted: Vec<f64> = r.iter().zip(a).map(|(x, y)| x - y).collect();
                    membership_gap(payoff.as_ref(), &shifted)
                }
                None => membership_gap(payoff.as_ref(), r),
            }),
            TradingFunction::ConstantMean { .. } => None,
        }
    }

    pub fn psi(&self, r: &[f64]) -> Extended {
        match self {
            TradingFunction::Indicator { tol, .. } => match self.gap(r) {
                Some(Ok(g)) if g >= -tol => Extended::ZERO,
                _ => Extended::NegInf,
            },
            TradingFunction::ConstantMean { weights } => {
                if r.len() != weights.len() || r.iter().any(|&x| !(x >= 0.0)) {
                    return Extended::NegInf;
                }
                let log: f64 = r.iter().zip(weights).map(|(&x, &w)| w * libm::log(x / w)).sum();
                Extended::Finite(libm::exp(log))
            }
        }
    }

    /// `ψ(R) ≥ level`.
    pub fn accepts(&self, r: &[f64]) -> bool {
        match self.psi(r) {
            Extended::Finite(x) => x >= self.level() - MEMBERSHIP_TOL,
            Extended::PosInf => true,
            Extended::NegInf => false,
        }
    }
}

/// `ψ_V` as an indicator, taking a recorded linear offset into account as
/// `ψ_V(R − a)`.
pub fn psi_indicator(v: PayoffRef) -> TradingFunction {
    let (payoff, shift) = match v.offset() {
        Some((inner, a)) => (Arc::clone(inner), Some(a.to_vec())),
        None => (v, None),
    };
    TradingFunction::Indicator { payoff, shift, tol: MEMBERSHIP_TOL }
}

/// The feasible set of `v` in any dimension, as a membership oracle on the
/// signed gap.
pub fn payoff_region(v: PayoffRef) -> TradingSet {
    TradingSet::from_region(Arc::new(PayoffRegion { payoff: v }), Provenance::Traced)
}

#[derive(Debug)]
struct PayoffRegion {
    payoff: PayoffRef,
}

impl Region for PayoffRegion {
    fn dim(&self) -> usize {
        self.payoff.dim()
    }

    fn classify(&self, r: &[f64], tol: f64) -> Membership {
        match membership_gap(self.payoff.as_ref(), r) {
            Ok(g) if g > tol => Membership::Inside,
            Ok(g) if g >= -tol => Membership::Boundary,
            _ => Membership::Outside,
        }
    }

    // R/s ∈ S iff cᵀR ≥ s·V(c) for every c, so the gauge is inf cᵀR / V(c)
    fn gauge(&self, r: &[f64]) -> f64 {
        let v = self.payoff.as_ref();
        if r.len() == 2 {
            return radial_gauge(|p| matches!(membership_gap(v, p), Ok(g) if g >= 0.0), r);
        }
        let ratio = |c: &[f64]| match v.value(c) {
            Extended::Finite(x) if x > 0.0 => dot(c, r) / x,
            Extended::PosInf => 0.0,
            _ => f64::INFINITY,
        };
        let (_, value) = minimize_on_simplex(ratio, r.len(), simplex_resolution(r.len()));
        value
    }
}
