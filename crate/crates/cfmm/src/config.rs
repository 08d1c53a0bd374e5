//! JSON payoff and simulation configuration.
//!
//! A payoff file looks like
//!
//! ```json
//! { "family": "bs_covered_call", "params": { "strike": 1, "sigma": 0.1, "tau": 10 }, "n": 2 }
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use cfmm_core::closed_forms::{
    bs_covered_call_boundary, constant_mean_boundary, covered_call_expiry_boundary, linear_boundary,
    log_contract_boundary, perpetual_put_boundary, quadratic_boundary, BsCoveredCallParams, ConstantMeanParams,
    CoveredCallExpiryParams, LogContractParams, PerpetualPutParams, QuadraticParams,
};
use cfmm_core::payoff::{perspective, CustomGrid, Linear};
use cfmm_core::{PayoffRef, TradingSet};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FamilyName {
    Linear,
    Quadratic,
    Power,
    CoveredCallExpiry,
    BsCoveredCall,
    PerpetualPut,
    LogContract,
    CustomGrid,
}

impl FamilyName {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyName::Linear => "linear",
            FamilyName::Quadratic => "quadratic",
            FamilyName::Power => "power",
            FamilyName::CoveredCallExpiry => "covered_call_expiry",
            FamilyName::BsCoveredCall => "bs_covered_call",
            FamilyName::PerpetualPut => "perpetual_put",
            FamilyName::LogContract => "log_contract",
            FamilyName::CustomGrid => "custom_grid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffSpec {
    pub family: FamilyName,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

/// A payoff together with its analytic trading set, when the family has one.
#[derive(Clone)]
pub struct BuiltPayoff {
    pub payoff: PayoffRef,
    pub closed: Option<TradingSet>,
}

impl std::fmt::Debug for BuiltPayoff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BuiltPayoff")
            .field("dim", &self.payoff.dim())
            .field("closed", &self.closed.as_ref().map(|s| s.provenance()))
            .finish()
    }
}

const ALIASES: [(&str, &str); 2] = [("K", "strike"), ("r", "rate")];

impl PayoffSpec {
    pub fn new(family: FamilyName) -> Self {
        PayoffSpec { family, params: Map::new(), n: None }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str::<PayoffSpec>(&text)?.canonical())
    }

    /// Renames parameter aliases (`K`, `r`) to their long names.
    pub fn canonical(mut self) -> Self {
        for (short, long) in ALIASES {
            if let Some(v) = self.params.remove(short) {
                self.params.entry(long).or_insert(v);
            }
        }
        self
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    fn num(&self, key: &str) -> Result<f64> {
        match self.params.get(key) {
            Some(v) => v.as_f64().ok_or_else(|| Error::config(format!("parameter `{key}` must be a number, got {v}"))),
            None => Err(self.missing(key)),
        }
    }

    fn num_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.params.contains_key(key) {
            self.num(key)
        } else {
            Ok(default)
        }
    }

    /// A number or an array of numbers.
    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let bad =
            |v: &Value| Error::config(format!("parameter `{key}` must be a number or a list of numbers, got {v}"));
        match self.params.get(key) {
            Some(Value::Array(items)) => items.iter().map(|x| x.as_f64().ok_or_else(|| bad(x))).collect(),
            Some(v) => v.as_f64().map(|x| vec![x]).ok_or_else(|| bad(v)),
            None => Err(self.missing(key)),
        }
    }

    /// A number, a flat row-major list, or a list of rows.
    fn matrix(&self, key: &str) -> Result<Vec<f64>> {
        match self.params.get(key) {
            Some(Value::Array(rows)) if rows.iter().all(Value::is_array) => {
                let mut out = Vec::new();
                for row in rows {
                    for x in row.as_array().unwrap() {
                        out.push(
                            x.as_f64()
                                .ok_or_else(|| Error::config(format!("matrix `{key}` must hold numbers, got {x}")))?,
                        );
                    }
                }
                Ok(out)
            }
            _ => self.list(key),
        }
    }

    fn missing(&self, key: &str) -> Error {
        Error::config(format!("family `{}` needs parameter `{key}`", self.family.as_str()))
    }

    pub fn build(&self) -> Result<BuiltPayoff> {
        let built = match self.family {
            FamilyName::Linear => {
                let p = Linear::new(self.list("a")?)?;
                BuiltPayoff { closed: Some(linear_boundary(&p)), payoff: Arc::new(p) }
            }
            FamilyName::Quadratic => {
                let p = QuadraticParams::new(self.matrix("A")?, self.list("a")?, self.num_or("b", 0.0)?)?;
                BuiltPayoff { closed: Some(quadratic_boundary(&p)), payoff: Arc::new(p) }
            }
            FamilyName::Power => {
                let w = self.list("w")?;
                let p = if w.len() == 1 { ConstantMeanParams::pair(w[0])? } else { ConstantMeanParams::new(w)? };
                BuiltPayoff { closed: Some(constant_mean_boundary(&p)), payoff: Arc::new(p) }
            }
            FamilyName::CoveredCallExpiry => {
                let p = CoveredCallExpiryParams::new(self.num("strike")?)?;
                BuiltPayoff { closed: Some(covered_call_expiry_boundary(&p)), payoff: Arc::new(p) }
            }
            FamilyName::BsCoveredCall => {
                let p = BsCoveredCallParams::new(self.num("strike")?, self.num("sigma")?, self.num("tau")?)?;
                BuiltPayoff { closed: Some(bs_covered_call_boundary(&p)), payoff: Arc::new(p) }
            }
            FamilyName::PerpetualPut => {
                let p = PerpetualPutParams::new(self.num("strike")?, self.num("sigma")?, self.num("rate")?)?;
                BuiltPayoff { closed: Some(perpetual_put_boundary(&p)), payoff: Arc::new(p) }
            }
            FamilyName::LogContract => {
                let p = LogContractParams::new(self.num("k")?)?;
                BuiltPayoff { closed: Some(log_contract_boundary(&p)), payoff: Arc::new(p) }
            }
            FamilyName::CustomGrid => {
                let grid = CustomGrid::new(self.list("prices")?, self.list("values")?)?;
                BuiltPayoff { payoff: perspective(grid), closed: None }
            }
        };
        if let Some(n) = self.n {
            if n != built.payoff.dim() {
                return Err(Error::config(format!(
                    "n = {n} does not match the {}-coin `{}` payoff",
                    built.payoff.dim(),
                    self.family.as_str()
                )));
            }
        }
        Ok(built)
    }
}

/// Where a simulation finds its trading set: inline or in its own file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetRef {
    Inline(PayoffSpec),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub sigma: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub steps: Option<usize>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub c0: Option<f64>,
    pub set: Option<SetRef>,
}

impl SimConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// The referenced payoff; file references resolve against `base`.
    pub fn payoff(&self, base: &Path) -> Result<Option<PayoffSpec>> {
        match &self.set {
            None => Ok(None),
            Some(SetRef::Inline(spec)) => Ok(Some(spec.clone().canonical())),
            Some(SetRef::File(p)) => PayoffSpec::from_file(&base.join(p)).map(Some),
        }
    }
}
