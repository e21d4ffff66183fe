use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::unknown_param;
use crate::error::{invalid, Result};

/// Named hyperparameter values (`N`, `omega`, `lambda1`, `N2`, ...).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Hyperparams(pub BTreeMap<String, f64>);

impl Hyperparams {
    pub fn new() -> Self {
        Hyperparams::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Hyperparams(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.0.get(name).copied().ok_or_else(|| unknown_param(name))
    }

    /// Integer count rounded to nearest; must be at least one.
    pub fn count(&self, name: &str) -> Result<usize> {
        let v = self.get(name)?;
        let r = v.round();
        if !(r >= 1.0 && r.is_finite()) {
            return Err(invalid(format!("`{name}` must be a count of at least 1, got {v}")));
        }
        Ok(r as usize)
    }

    pub fn positive(&self, name: &str) -> Result<f64> {
        let v = self.get(name)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("`{name}` must be positive, got {v}")));
        }
        Ok(v)
    }
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(" "))
    }
}
