use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::destroy::RemovalParams;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Score for a new global best.
    pub sigma1: f64,
    /// Score for an accepted candidate that improves the current solution.
    pub sigma2: f64,
    /// Score for an accepted candidate that does not improve the current solution.
    pub sigma3: f64,
    /// Score for a rejected candidate.
    pub sigma4: f64,
    /// Weight decay.
    pub delta: f64,
    /// Maximum iterations.
    pub lambda: usize,
    /// Minimum iterations before the convergence test applies.
    pub lambda_min: usize,
    /// Look-back span of the convergence test.
    pub omega: usize,
    pub epsilon: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Cooling factor per iteration.
    pub nu: f64,
    pub rng_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            sigma1: 7.0,
            sigma2: 2.0,
            sigma3: 9.0,
            sigma4: 1.0,
            delta: 0.1,
            lambda: 10_000,
            lambda_min: 2_000,
            omega: 1_000,
            epsilon: 0.01,
            t_start: 100.0,
            t_end: 0.0001,
            nu: 0.9999,
            rng_seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err("delta must be in [0, 1]".into());
        }
        if self.lambda_min > self.lambda {
            return Err("lambda_min must not exceed lambda".into());
        }
        if self.omega < 1 {
            return Err("omega must be >= 1".into());
        }
        if !(self.t_start > self.t_end && self.t_end > 0.0) {
            return Err("temperatures must satisfy t_start > t_end > 0".into());
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err("nu must be in (0, 1)".into());
        }
        if [self.sigma1, self.sigma2, self.sigma3, self.sigma4]
            .iter()
            .any(|s| !(*s > 0.0))
        {
            return Err("scores must be positive".into());
        }
        Ok(())
    }
}

/// Search and removal parameters together. The JSON form is a single flat
/// object using the field names of both structs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlnsParams {
    pub search: SearchConfig,
    pub removal: RemovalParams,
}

impl AlnsParams {
    pub fn validate(&self) -> Result<(), Error> {
        self.search.validate().map_err(Error::Schema)?;
        self.removal.validate().map_err(Error::Schema)
    }

    /// Applies overrides from a flat JSON object. Unknown keys are rejected.
    pub fn with_overrides(&self, text: &str) -> Result<Self, Error> {
        let overrides: Map<String, Value> = serde_json::from_str(text)?;
        let mut search = to_map(&self.search);
        let mut removal = to_map(&self.removal);
        for (key, value) in overrides {
            if search.contains_key(&key) {
                search.insert(key, value);
            } else if removal.contains_key(&key) {
                removal.insert(key, value);
            } else {
                return Err(Error::Schema(format!("unknown parameter `{key}`")));
            }
        }
        let out = Self {
            search: serde_json::from_value(Value::Object(search))?,
            removal: serde_json::from_value(Value::Object(removal))?,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let mut all = to_map(&self.search);
        all.extend(to_map(&self.removal));
        serde_json::to_string_pretty(&Value::Object(all)).expect("params serialize")
    }
}

fn to_map<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v).expect("params serialize") {
        Value::Object(m) => m,
        _ => unreachable!("params serialize to objects"),
    }
}
