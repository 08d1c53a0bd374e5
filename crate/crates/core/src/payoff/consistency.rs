use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Payoff;
use crate::{Error, Extended, Result};

/// How [`check_consistency`] draws its sample prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    /// Number of sample prices; also the number of pairs and scale draws.
    pub samples: usize,
    pub seed: u64,
    /// Each price component is drawn log-uniformly from this range.
    pub price_range: (f64, f64),
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec { samples: 200, seed: 0x5eed, price_range: (1e-3, 1e3) }
    }
}

/// Outcome of one axiom over all samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomResult {
    pub passed: bool,
    /// Largest violation, normalized by `1 + |V|` at the offending sample.
    pub worst_violation: f64,
    /// Samples where the payoff was not finite.
    pub non_finite: usize,
}

impl AxiomResult {
    fn new() -> Self {
        AxiomResult { passed: true, worst_violation: 0.0, non_finite: 0 }
    }

    fn record(&mut self, violation: f64, scale: f64, tol: f64) {
        let v = violation.max(0.0) / (1.0 + scale.abs());
        if v > self.worst_violation {
            self.worst_violation = v;
        }
        if v > tol {
            self.passed = false;
        }
    }

    fn record_non_finite(&mut self) {
        self.non_finite += 1;
        self.worst_violation = f64::INFINITY;
        self.passed = false;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    pub concave: AxiomResult,
    pub nonnegative: AxiomResult,
    pub nondecreasing: AxiomResult,
    pub one_homogeneous: AxiomResult,
    pub samples_used: usize,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.concave.passed && self.nonnegative.passed && self.nondecreasing.passed && self.one_homogeneous.passed
    }
}

/// Sampled check of the four axioms a CFMM payoff must satisfy.
///
/// * concavity: `V((c+c′)/2) ≥ (V(c)+V(c′))/2` on random pairs,
/// * nonnegativity: `V(c) ≥ 0`,
/// * monotonicity: `V(c + εeᵢ) ≥ V(c)`,
/// * 1-homogeneity: `V(ηc) = ηV(c)` for `η ∈ (0, 10]`.
///
/// Each inequality may be violated by `tol · (1 + |V|)`. A pass is evidence,
/// not proof. Non-finite values are recorded against the axiom being tested.
pub fn check_consistency(v: &dyn Payoff, spec: &SamplingSpec, tol: f64) -> Result<ConsistencyReport> {
    if spec.samples < 100 {
        return Err(Error::InvalidParameter(alloc::format!(
            "consistency check needs at least 100 samples, got {}",
            spec.samples
        )));
    }
    let (lo, hi) = spec.price_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidParameter("sampling range must be 0 < lo < hi".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }

    let n = v.dim();
    let (log_lo, log_hi) = (libm::log(lo), libm::log(hi));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draw =
        |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| libm::exp(rng.random_range(log_lo..log_hi))).collect() };

    let mut concave = AxiomResult::new();
    let mut nonnegative = AxiomResult::new();
    let mut nondecreasing = AxiomResult::new();
    let mut one_homogeneous = AxiomResult::new();

    for i in 0..spec.samples {
        let c = draw(&mut rng);
        let other = draw(&mut rng);
        let eta: f64 = 10.0 * (1.0 - rng.random::<f64>());
        let bump: f64 = 1.0 - rng.random::<f64>();
        let coord = i % n;

        let vc = v.value(&c);
        match vc {
            Extended::Finite(x) => nonnegative.record(-x, x, tol),
            _ => nonnegative.record_non_finite(),
        }

        let mid: Vec<f64> = c.iter().zip(&other).map(|(a, b)| 0.5 * (a + b)).collect();
        match (vc, v.value(&other), v.value(&mid)) {
            (Extended::Finite(a), Extended::Finite(b), Extended::Finite(m)) => {
                let scale = a.abs().max(b.abs()).max(m.abs());
                concave.record(0.5 * (a + b) - m, scale, tol);
            }
            _ => concave.record_non_finite(),
        }

        let mut up = c.clone();
        up[coord] += bump * c[coord];
        match (vc, v.value(&up)) {
            (Extended::Finite(a), Extended::Finite(b)) => nondecreasing.record(a - b, a.abs().max(b.abs()), tol),
            _ => nondecreasing.record_non_finite(),
        }

        let scaled: Vec<f64> = c.iter().map(|x| eta * x).collect();
        match (vc, v.value(&scaled)) {
            (Extended::Finite(a), Extended::Finite(b)) => {
                one_homogeneous.record((b - eta * a).abs(), a.abs().max(b.abs()), tol)
            }
            _ => one_homogeneous.record_non_finite(),
        }
    }

    Ok(ConsistencyReport { concave, nonnegative, nondecreasing, one_homogeneous, samples_used: spec.samples })
}
