use std::sync::Arc;

use cfmm_core::closed_forms::{
    BsCoveredCallParams, ConstantMeanParams, CoveredCallExpiryParams, LogContractParams, PerpetualPutParams,
};
use cfmm_core::payoff::{
    check_consistency, linear_offset, perspective, supergradient_fd, FnPayoff, Power, ReducedPayoff, SamplingSpec,
};
use cfmm_core::{Extended, Payoff, PayoffRef, PriceVector};
use proptest::prelude::*;

/// `U(x) = ln(1 + x)`: concave, increasing, zero at the origin.
struct Log1p;

impl ReducedPayoff for Log1p {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, c: &[f64]) -> Extended {
        Extended::Finite(c[0].ln_1p())
    }
}

fn builtins() -> Vec<(&'static str, PayoffRef)> {
    vec![
        ("geometric mean", Arc::new(ConstantMeanParams::pair(0.3).unwrap())),
        ("covered call expiry", Arc::new(CoveredCallExpiryParams::new(2.0).unwrap())),
        ("bs covered call", Arc::new(BsCoveredCallParams::new(1.0, 0.1, 10.0).unwrap())),
        ("perpetual put", Arc::new(PerpetualPutParams::new(1.0, 0.25, 0.05).unwrap())),
        ("log contract", Arc::new(LogContractParams::new(1.0).unwrap())),
        ("power", perspective(Power::new(0.5).unwrap())),
        ("three-coin mean", Arc::new(ConstantMeanParams::new(vec![0.2, 0.3, 0.5]).unwrap())),
    ]
}

fn price() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

fn value(v: &dyn Payoff, c: &[f64]) -> f64 {
    v.value(c).finite().expect("finite payoff")
}

#[test]
fn builtins_are_consistent() {
    let spec = SamplingSpec { samples: 2000, ..SamplingSpec::default() };
    for (name, v) in builtins() {
        let report = check_consistency(v.as_ref(), &spec, 1e-9).unwrap();
        assert!(report.passed(), "{name}: {report:?}");
    }
}

#[test]
fn convex_payoff_fails_concavity() {
    let v = FnPayoff::new(2, |c: &[f64]| c[0].max(c[1]).powi(2) / (c[0] + c[1]));
    let report = check_consistency(&v, &SamplingSpec::default(), 1e-9).unwrap();
    assert!(!report.concave.passed);
    assert!(!report.passed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn perspective_is_homogeneous(x in price(), cn in price(), eta in 1e-3f64..1e3) {
        let v = perspective(Log1p);
        let base = value(v.as_ref(), &[x, cn]);
        let scaled = value(v.as_ref(), &[eta * x, eta * cn]);
        prop_assert!((scaled - eta * base).abs() <= 1e-12 * (1.0 + (eta * base).abs()));
    }

    #[test]
    fn perspective_restricts_exactly(x in price()) {
        let v = perspective(Log1p);
        prop_assert_eq!(v.value(&[x, 1.0]), Extended::Finite(x.ln_1p()));
    }

    #[test]
    fn offsets_add(a in prop::array::uniform2(0.0f64..5.0), b in prop::array::uniform2(0.0f64..5.0),
                   c1 in price(), c2 in price()) {
        let v = perspective(Power::new(0.5).unwrap());
        let twice = linear_offset(linear_offset(v.clone(), a.to_vec()).unwrap(), b.to_vec()).unwrap();
        let once = linear_offset(v, vec![a[0] + b[0], a[1] + b[1]]).unwrap();
        prop_assert_eq!(twice.value(&[c1, c2]), once.value(&[c1, c2]));
    }

    #[test]
    fn analytic_gradient_matches_fd(c1 in price(), c2 in price()) {
        for (name, v) in builtins() {
            let c: Vec<f64> = if v.dim() == 3 { vec![c1, c2, 1.0] } else { vec![c1, c2] };
            let ratio = c1 / c2;
            // stay away from kinks: the strike, the exercise boundary, the log floor
            let kinks = [2.0, PerpetualPutParams::new(1.0, 0.25, 0.05).unwrap().exercise_boundary(), (-1.0f64).exp()];
            if kinks.iter().any(|k| (ratio / k).ln().abs() < 1e-3) {
                continue;
            }
            let analytic = v.supergradient(&c).unwrap();
            let scale = c.iter().cloned().fold(f64::INFINITY, f64::min);
            let fd = supergradient_fd(v.as_ref(), &PriceVector::new(c.clone()).unwrap(), 1e-6 * scale).unwrap();
            for (a, b) in analytic.iter().zip(fd.iter()) {
                prop_assert!((a - b).abs() <= 1e-5 * (1.0 + a.abs()), "{}: {:?} vs {:?} at {:?}", name, analytic, fd, c);
            }
        }
    }
}
