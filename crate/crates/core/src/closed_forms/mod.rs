//! Analytic trading sets and payoffs for the worked families.
//!
//! Every family is both a [`Payoff`] (with an analytic supergradient) and a
//! constructor of its closed-form [`TradingSet`], so the generic tracer and
//! the closed form can be checked against each other.

mod hedge;
mod normal;

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::conjugate::{BoundaryCurve, Family, Membership, Provenance, Region, TradingFunction, TradingSet};
use crate::payoff::{dot, in_orthant, Linear, Payoff};
use crate::{Error, Extended, Result};

pub use hedge::{delta_hedge_curve, HedgeConstant, HedgeOptions};
pub use normal::{norm_cdf, norm_pdf, norm_quantile};

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("{name} must be positive and finite, got {x}")))
    }
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("{name} must be nonnegative and finite, got {x}")))
    }
}

/// Reduced price `c₁/c₂` of a two-coin perspective payoff, or `None` where
/// the payoff is `−∞`.
fn reduced(c: &[f64]) -> Option<f64> {
    if c.len() != 2 || !in_orthant(c) || c[1] <= 0.0 {
        None
    } else {
        Some(c[0] / c[1])
    }
}

// ---------------------------------------------------------------- linear

/// The single point `R = a`: only the null trade is allowed.
pub fn linear_boundary(payoff: &Linear) -> TradingSet {
    TradingSet::from_point(payoff.holdings().to_vec(), Provenance::ClosedForm(Family::Linear))
}

// ---------------------------------------------------------------- constant mean

/// Weighted geometric mean `V(c) = ∏ cᵢ^wᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantMeanParams {
    w: Vec<f64>,
}

impl ConstantMeanParams {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 {
            return Err(Error::Dimension { expected: 2, got: w.len() });
        }
        for &wi in &w {
            positive("weight", wi)?;
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(alloc::format!("weights must sum to 1, got {total}")));
        }
        Ok(ConstantMeanParams { w })
    }

    /// Two coins with weight `w` on the traded coin.
    pub fn pair(w: f64) -> Result<Self> {
        ConstantMeanParams::new(alloc::vec![w, 1.0 - w])
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// `ψ(R) = ∏ (Rᵢ/wᵢ)^wᵢ` at level 1.
    pub fn invariant(&self) -> TradingFunction {
        TradingFunction::ConstantMean { weights: self.w.clone() }
    }
}

impl Payoff for ConstantMeanParams {
    fn dim(&self) -> usize {
        self.w.len()
    }

    fn value(&self, c: &[f64]) -> Extended {
        if c.len() != self.w.len() || !in_orthant(c) {
            return Extended::NegInf;
        }
        Extended::Finite(c.iter().zip(&self.w).map(|(&ci, &wi)| libm::pow(ci, wi)).product())
    }

    fn supergradient(&self, c: &[f64]) -> Option<Vec<f64>> {
        if c.len() != self.w.len() || c.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return None;
        }
        let v = self.value(c).finite()?;
        Some(c.iter().zip(&self.w).map(|(&ci, &wi)| wi * v / ci).collect())
    }
}

#[derive(Debug)]
struct ConstantMeanCurve {
    w: f64,
}

impl BoundaryCurve for ConstantMeanCurve {
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn height(&self, r1: f64) -> f64 {
        if r1 <= 0.0 {
            return f64::INFINITY;
        }
        (1.0 - self.w) * libm::pow(r1 / self.w, -self.w / (1.0 - self.w))
    }

    fn slope(&self, r1: f64) -> f64 {
        -self.w / (1.0 - self.w) * self.height(r1) / r1
    }
}

#[derive(Debug)]
struct ConstantMeanRegion {
    w: Vec<f64>,
}

impl ConstantMeanRegion {
    fn mean(&self, r: &[f64]) -> f64 {
        if r.iter().any(|&x| x <= 0.0) {
            return 0.0;
        }
        libm::exp(r.iter().zip(&self.w).map(|(&x, &w)| w * libm::log(x / w)).sum())
    }
}

impl Region for ConstantMeanRegion {
    fn dim(&self) -> usize {
        self.w.len()
    }

    fn classify(&self, r: &[f64], tol: f64) -> Membership {
        if r.len() != self.w.len() {
            return Membership::Outside;
        }
        let m = self.mean(r);
        if m > 1.0 + tol {
            Membership::Inside
        } else if m >= 1.0 - tol {
            Membership::Boundary
        } else {
            Membership::Outside
        }
    }

    fn gauge(&self, r: &[f64]) -> f64 {
        self.mean(r)
    }
}

/// `∏ (Rᵢ/wᵢ)^wᵢ ≥ 1`: an explicit curve for two coins, a region otherwise.
pub fn constant_mean_boundary(params: &ConstantMeanParams) -> TradingSet {
    let provenance = Provenance::ClosedForm(Family::ConstantMean);
    if params.w.len() == 2 {
        TradingSet::from_curve(Arc::new(ConstantMeanCurve { w: params.w[0] }), provenance)
    } else {
        TradingSet::from_region(Arc::new(ConstantMeanRegion { w: params.w.clone() }), provenance)
    }
}

// ---------------------------------------------------------------- quadratic

/// Concave quadratic reduced payoff `U(c′) = −½ c′ᵀAc′ + aᵀc′ + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticParams {
    m: usize,
    a_mat: Vec<f64>,
    chol: Vec<f64>,
    a: Vec<f64>,
    b: f64,
}

impl QuadraticParams {
    /// `a_mat` is `m × m`, row-major, symmetric positive definite.
    pub fn new(a_mat: Vec<f64>, a: Vec<f64>, b: f64) -> Result<Self> {
        let m = a.len();
        if m == 0 || a_mat.len() != m * m {
            return Err(Error::Dimension { expected: m * m, got: a_mat.len() });
        }
        for &x in &a {
            nonnegative("offset a", x)?;
        }
        nonnegative("offset b", b)?;
        for i in 0..m {
            for j in 0..i {
                let (x, y) = (a_mat[i * m + j], a_mat[j * m + i]);
                if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                    return Err(Error::InvalidParameter("matrix A must be symmetric".into()));
                }
            }
        }
        let chol = cholesky(&a_mat, m)?;
        Ok(QuadraticParams { m, a_mat, chol, a, b })
    }

    /// One traded coin: `U(c₁) = −½Ac₁² + ac₁ + b`.
    pub fn scalar(a_coef: f64, a: f64, b: f64) -> Result<Self> {
        QuadraticParams::new(alloc::vec![a_coef], alloc::vec![a], b)
    }

    /// `½ (R′−a)ᵀA⁻¹(R′−a)`.
    pub fn quadratic_form(&self, r: &[f64]) -> f64 {
        let mut z: Vec<f64> = r.iter().zip(&self.a).map(|(x, a)| x - a).collect();
        // forward substitution with the lower Cholesky factor
        for i in 0..self.m {
            let row = &self.chol[i * self.m..(i + 1) * self.m];
            let s = z[i] - dot(&row[..i], &z[..i]);
            z[i] = s / row[i];
        }
        0.5 * dot(&z, &z)
    }

    /// Largest relative price up to which the set replicates `U` (`m = 1`):
    /// beyond `a/A` the reduced payoff decreases.
    pub fn validity_limit(&self) -> Option<f64> {
        (self.m == 1).then(|| self.a[0] / self.a_mat[0])
    }

    fn reduced_value(&self, x: &[f64]) -> f64 {
        let mut quad = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                quad += x[i] * self.a_mat[i * self.m + j] * x[j];
            }
        }
        -0.5 * quad + dot(&self.a, x) + self.b
    }
}

fn cholesky(a: &[f64], m: usize) -> Result<Vec<f64>> {
    let mut l = alloc::vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::NotPositiveDefinite);
                }
                l[i * m + i] = libm::sqrt(s);
            } else {
                l[i * m + j] = s / l[j * m + j];
            }
        }
    }
    Ok(l)
}

impl Payoff for QuadraticParams {
    fn dim(&self) -> usize {
        self.m + 1
    }

    fn value(&self, c: &[f64]) -> Extended {
        if c.len() != self.m + 1 || !in_orthant(c) || c[self.m] <= 0.0 {
            return Extended::NegInf;
        }
        let cn = c[self.m];
        let x: Vec<f64> = c[..self.m].iter().map(|v| v / cn).collect();
        Extended::Finite(cn * self.reduced_value(&x))
    }

    fn supergradient(&self, c: &[f64]) -> Option<Vec<f64>> {
        if c.len() != self.m + 1 || !in_orthant(c) || c[self.m] <= 0.0 {
            return None;
        }
        let cn = c[self.m];
        let x: Vec<f64> = c[..self.m].iter().map(|v| v / cn).collect();
        let mut g: Vec<f64> = (0..self.m)
            .map(|i| self.a[i] - (0..self.m).map(|j| self.a_mat[i * self.m + j] * x[j]).sum::<f64>())
            .collect();
        let mut quad = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                quad += x[i] * self.a_mat[i * self.m + j] * x[j];
            }
        }
        g.push(self.b + 0.5 * quad);
        Some(g)
    }
}

#[derive(Debug)]
struct QuadraticCurve {
    a_coef: f64,
    a: f64,
    b: f64,
}

impl BoundaryCurve for QuadraticCurve {
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn height(&self, r1: f64) -> f64 {
        let d = r1 - self.a;
        self.b + d * d / (2.0 * self.a_coef)
    }

    fn slope(&self, r1: f64) -> f64 {
        (r1 - self.a) / self.a_coef
    }

    fn valid_prices(&self) -> (f64, f64) {
        (0.0, self.a / self.a_coef)
    }

    fn upward_closed(&self) -> bool {
        false
    }
}

#[derive(Debug)]
struct QuadraticRegion {
    params: QuadraticParams,
}

impl Region for QuadraticRegion {
    fn dim(&self) -> usize {
        self.params.m + 1
    }

    fn classify(&self, r: &[f64], tol: f64) -> Membership {
        let m = self.params.m;
        if r.len() != m + 1 {
            return Membership::Outside;
        }
        let rhs = r[m] - self.params.b;
        let q = self.params.quadratic_form(&r[..m]);
        let band = tol * (1.0 + q.abs());
        if rhs - q > band {
            Membership::Inside
        } else if rhs - q >= -band {
            Membership::Boundary
        } else {
            Membership::Outside
        }
    }
}

/// `½ (R′−a)ᵀA⁻¹(R′−a) ≤ Rₙ − b`; a parabola `φ(R₁) = b + (R₁−a)²/(2A)` for
/// one traded coin. The set is not upward closed.
pub fn quadratic_boundary(params: &QuadraticParams) -> TradingSet {
    let provenance = Provenance::ClosedForm(Family::Quadratic);
    if params.m == 1 {
        let curve = QuadraticCurve { a_coef: params.a_mat[0], a: params.a[0], b: params.b };
        TradingSet::from_curve(Arc::new(curve), provenance)
    } else {
        TradingSet::from_region(Arc::new(QuadraticRegion { params: params.clone() }), provenance)
    }
}

// ---------------------------------------------------------------- covered call at expiry

/// Terminal covered call `V(c) = min(c₁, Kc₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveredCallExpiryParams {
    strike: f64,
}

impl CoveredCallExpiryParams {
    pub fn new(strike: f64) -> Result<Self> {
        positive("strike", strike)?;
        Ok(CoveredCallExpiryParams { strike })
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }
}

impl Payoff for CoveredCallExpiryParams {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, c: &[f64]) -> Extended {
        if c.len() != 2 || !in_orthant(c) {
            return Extended::NegInf;
        }
        Extended::Finite(c[0].min(self.strike * c[1]))
    }

    /// Left-continuous in `c₁`: the kink `c₁ = Kc₂` selects `(1, 0)`.
    fn supergradient(&self, c: &[f64]) -> Option<Vec<f64>> {
        if c.len() != 2 || !in_orthant(c) {
            return None;
        }
        Some(if c[0] <= self.strike * c[1] { alloc::vec![1.0, 0.0] } else { alloc::vec![0.0, self.strike] })
    }
}

#[derive(Debug)]
struct SegmentCurve {
    strike: f64,
}

impl BoundaryCurve for SegmentCurve {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn height(&self, r1: f64) -> f64 {
        self.strike * (1.0 - r1.clamp(0.0, 1.0))
    }

    fn slope(&self, _r1: f64) -> f64 {
        -self.strike
    }
}

/// The constant-sum set `KR₁ + R₂ ≥ K` on `R₁ ∈ [0, 1]`.
pub fn covered_call_expiry_boundary(params: &CoveredCallExpiryParams) -> TradingSet {
    TradingSet::from_curve(
        Arc::new(SegmentCurve { strike: params.strike }),
        Provenance::ClosedForm(Family::CoveredCallExpiry),
    )
}

// ---------------------------------------------------------------- Black-Scholes covered call

/// Covered call before expiry at zero rate:
/// `U(c₁) = c₁Φ(−d₁) + KΦ(d₂)`, `d₁ = (ln(c₁/K) + σ²τ/2)/(σ√τ)`, `d₂ = d₁ − σ√τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsCoveredCallParams {
    strike: f64,
    sigma: f64,
    tau: f64,
}

impl BsCoveredCallParams {
    pub fn new(strike: f64, sigma: f64, tau: f64) -> Result<Self> {
        positive("strike", strike)?;
        nonnegative("sigma", sigma)?;
        nonnegative("tau", tau)?;
        if !(sigma * libm::sqrt(tau)).is_finite() {
            return Err(Error::InvalidParameter("sigma * sqrt(tau) must be finite".into()));
        }
        Ok(BsCoveredCallParams { strike, sigma, tau })
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Total volatility `σ√τ`.
    pub fn total_vol(&self) -> f64 {
        self.sigma * libm::sqrt(self.tau)
    }

    /// `(U(x), U′(x))` at reduced price `x ≥ 0`.
    pub fn reduced(&self, x: f64) -> (f64, f64) {
        let (k, s) = (self.strike, self.total_vol());
        if s == 0.0 {
            return if x <= k { (x, 1.0) } else { (k, 0.0) };
        }
        if x == 0.0 {
            return (0.0, 1.0);
        }
        let d1 = (libm::log(x / k) + 0.5 * s * s) / s;
        let d2 = d1 - s;
        let delta = norm_cdf(-d1);
        (x * delta + k * norm_cdf(d2), delta)
    }

    /// Holdings of the traded coin, `R₁(c₁) = Φ(−d₁)`.
    pub fn delta(&self, x: f64) -> f64 {
        self.reduced(x).1
    }
}

impl Payoff for BsCoveredCallParams {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, c: &[f64]) -> Extended {
        match reduced(c) {
            Some(x) => Extended::Finite(c[1] * self.reduced(x).0),
            None => Extended::NegInf,
        }
    }

    fn supergradient(&self, c: &[f64]) -> Option<Vec<f64>> {
        let x = reduced(c)?;
        let (k, s) = (self.strike, self.total_vol());
        if s == 0.0 || x == 0.0 {
            let delta = self.reduced(x).1;
            return Some(alloc::vec![delta, if delta > 0.0 { 0.0 } else { k }]);
        }
        let d1 = (libm::log(x / k) + 0.5 * s * s) / s;
        Some(alloc::vec![norm_cdf(-d1), k * norm_cdf(d1 - s)])
    }
}

#[derive(Debug)]
struct BsCurve {
    strike: f64,
    s: f64,
}

impl BoundaryCurve for BsCurve {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn height(&self, r1: f64) -> f64 {
        if r1 <= 0.0 {
            return self.strike;
        }
        if r1 >= 1.0 {
            return 0.0;
        }
        // Φ⁻¹(1 − R₁) = −Φ⁻¹(R₁) keeps precision for small R₁
        self.strike * norm_cdf(-norm_quantile(r1) - self.s)
    }

    fn slope(&self, r1: f64) -> f64 {
        if r1 <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if r1 >= 1.0 {
            return if self.s == 0.0 { -self.strike } else { 0.0 };
        }
        let z = -norm_quantile(r1);
        -self.strike * libm::exp(z * self.s - 0.5 * self.s * self.s)
    }
}

/// `R₂ ≥ KΦ(Φ⁻¹(1−R₁) − σ√τ)` on `R₁ ∈ [0, 1]`.
pub fn bs_covered_call_boundary(params: &BsCoveredCallParams) -> TradingSet {
    TradingSet::from_curve(
        Arc::new(BsCurve { strike: params.strike, s: params.total_vol() }),
        Provenance::ClosedForm(Family::BsCoveredCall),
    )
}

// ---------------------------------------------------------------- perpetual put

/// Perpetual American put plus the exercised coin:
/// `U(c₁) = c₁` below `L = γK`, `K − (K−L)(c₁/L)^(−2r/σ²)` above, with
/// `γ = 2r/(2r+σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerpetualPutParams {
    strike: f64,
    sigma: f64,
    rate: f64,
}

impl PerpetualPutParams {
    pub fn new(strike: f64, sigma: f64, rate: f64) -> Result<Self> {
        positive("strike", strike)?;
        positive("sigma", sigma)?;
        positive("rate", rate)?;
        Ok(PerpetualPutParams { strike, sigma, rate })
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn gamma(&self) -> f64 {
        2.0 * self.rate / (2.0 * self.rate + self.sigma * self.sigma)
    }

    /// Exercise boundary `L`.
    pub fn exercise_boundary(&self) -> f64 {
        self.gamma() * self.strike
    }

    fn beta(&self) -> f64 {
        2.0 * self.rate / (self.sigma * self.sigma)
    }

    /// `(U(x), U′(x))` at reduced price `x ≥ 0`.
    pub fn reduced(&self, x: f64) -> (f64, f64) {
        let l = self.exercise_boundary();
        if x <= l {
            return (x, 1.0);
        }
        let decay = libm::pow(x / l, -self.beta());
        let value = self.strike - (self.strike - l) * decay;
        let delta = self.beta() * (self.strike - l) / l * decay * l / x;
        (value, delta)
    }
}

impl Payoff for PerpetualPutParams {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, c: &[f64]) -> Extended {
        match reduced(c) {
            Some(x) => Extended::Finite(c[1] * self.reduced(x).0),
            None => Extended::NegInf,
        }
    }

    fn supergradient(&self, c: &[f64]) -> Option<Vec<f64>> {
        let x = reduced(c)?;
        let (u, delta) = self.reduced(x);
        Some(alloc::vec![delta, (u - x * delta).max(0.0)])
    }
}

#[derive(Debug)]
struct PutCurve {
    strike: f64,
    gamma: f64,
}

impl BoundaryCurve for PutCurve {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    fn height(&self, r1: f64) -> f64 {
        self.strike * (1.0 - libm::pow(r1.clamp(0.0, 1.0), self.gamma))
    }

    fn slope(&self, r1: f64) -> f64 {
        -self.strike * self.gamma * libm::pow(r1, self.gamma - 1.0)
    }
}

/// `R₂ ≥ K(1 − R₁^γ)` on `R₁ ∈ [0, 1]`.
pub fn perpetual_put_boundary(params: &PerpetualPutParams) -> TradingSet {
    TradingSet::from_curve(
        Arc::new(PutCurve { strike: params.strike, gamma: params.gamma() }),
        Provenance::ClosedForm(Family::PerpetualPut),
    )
}

// ---------------------------------------------------------------- log contract

/// The payoff of the CFMM `R₂ = k − ln R₁`:
/// `V(c) = c₂(1 + k + ln(c₁/c₂))` for `c₁ ≥ e^(−k)c₂` and `e^k c₁` below,
/// where the pool has run out of the numéraire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogContractParams {
    k: f64,
}

impl LogContractParams {
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("k must be finite, got {k}")));
        }
        Ok(LogContractParams { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Lowest price `e^(−k)` at which the hedge still holds.
    pub fn price_floor(&self) -> f64 {
        libm::exp(-self.k)
    }

    /// `(U(x), U′(x))` at reduced price `x ≥ 0`.
    pub fn reduced(&self, x: f64) -> (f64, f64) {
        if x >= self.price_floor() {
            (1.0 + self.k + libm::log(x), 1.0 / x)
        } else {
            (libm::exp(self.k) * x, libm::exp(self.k))
        }
    }
}

impl Payoff for LogContractParams {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, c: &[f64]) -> Extended {
        match reduced(c) {
            Some(x) => Extended::Finite(c[1] * self.reduced(x).0),
            None => Extended::NegInf,
        }
    }

    fn supergradient(&self, c: &[f64]) -> Option<Vec<f64>> {
        let x = reduced(c)?;
        Some(if x >= self.price_floor() {
            alloc::vec![1.0 / x, self.k + libm::log(x)]
        } else {
            alloc::vec![libm::exp(self.k), 0.0]
        })
    }
}

#[derive(Debug)]
struct LogCurve {
    k: f64,
}

impl BoundaryCurve for LogCurve {
    fn domain(&self) -> (f64, f64) {
        (0.0, libm::exp(self.k))
    }

    fn height(&self, r1: f64) -> f64 {
        if r1 <= 0.0 {
            return f64::INFINITY;
        }
        (self.k - libm::log(r1)).max(0.0)
    }

    fn slope(&self, r1: f64) -> f64 {
        -1.0 / r1
    }

    fn valid_prices(&self) -> (f64, f64) {
        (libm::exp(-self.k), f64::INFINITY)
    }
}

/// `R₂ ≥ k − ln R₁` on `R₁ ∈ (0, e^k]`.
pub fn log_contract_boundary(params: &LogContractParams) -> TradingSet {
    TradingSet::from_curve(
        Arc::new(LogCurve { k: params.k }),
        Provenance::ClosedForm(Family::LogContract { k: params.k }),
    )
}
