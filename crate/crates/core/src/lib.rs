//! Constant function market makers built from liquidity-provider payoffs.
//!
//! A payoff `V(c)` that is concave, nonnegative, nondecreasing and
//! 1-homogeneous in the price vector `c` is exactly the portfolio value of
//! some convex CFMM. This crate builds that CFMM in both directions:
//!
//! * [`payoff`] describes payoffs, their perspective and linear-offset
//!   transforms, and sampled checks of the four consistency axioms.
//! * [`conjugate`] turns a payoff into its feasible reserve set by collecting
//!   supergradients (one boundary point per price) and exposes the indicator
//!   trading function `ψ_V(R) = inf_c (cᵀR − V(c))`.
//! * [`closed_forms`] holds the analytic trading sets for the constant-mean,
//!   quadratic, covered-call, Black-Scholes covered-call, perpetual-put and
//!   log-contract families, plus delta-hedge curve construction.
//! * [`verify`] solves the forward arbitrage problem `inf { cᵀR | R ∈ S }`
//!   independently, so every construction can be round-tripped.
//! * [`sim`] runs Monte-Carlo replication experiments on a trading set.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > y)` is how NaN gets rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod closed_forms;
pub mod conjugate;
mod error;
mod extended;
pub mod minimize;
pub mod payoff;
pub mod sim;
pub mod verify;

pub use conjugate::{Membership, Reserves, TradingFunction, TradingSet};
pub use error::{Error, Result};
pub use extended::Extended;
pub use payoff::{Payoff, PayoffRef, PriceVector};
