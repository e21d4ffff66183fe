use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::problems::Hyperparams;

/// One searchable hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDim {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// Rounded to the nearest integer when decoded.
    #[serde(default)]
    pub integer: bool,
}

/// Box-bounded search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperparamSpace {
    dims: Vec<SpaceDim>,
}

/// Velocity limit as a fraction of each range.
pub const VELOCITY_FRACTION: f64 = 0.2;
/// Largest mutation standard deviation as a fraction of each range.
pub const MUTATION_FRACTION: f64 = 0.1;

impl HyperparamSpace {
    pub fn new(dims: Vec<SpaceDim>) -> Result<Self> {
        if dims.is_empty() {
            return Err(invalid("search space has no dimensions"));
        }
        for d in &dims {
            if !(d.lower.is_finite() && d.upper.is_finite() && d.lower < d.upper) {
                return Err(invalid(format!("dimension `{}` needs finite lower < upper", d.name)));
            }
        }
        for (i, d) in dims.iter().enumerate() {
            if dims[..i].iter().any(|e| e.name == d.name) {
                return Err(invalid(format!("dimension `{}` listed twice", d.name)));
            }
        }
        Ok(HyperparamSpace { dims })
    }

    pub fn from_ranges(ranges: &[(&str, f64, f64, bool)]) -> Result<Self> {
        HyperparamSpace::new(
            ranges
                .iter()
                .map(|&(name, lower, upper, integer)| SpaceDim { name: name.into(), lower, upper, integer })
                .collect(),
        )
    }

    /// `[lower, upper]^dim` with unnamed real dimensions `x1, x2, ...`.
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        HyperparamSpace::new(
            (0..dim).map(|j| SpaceDim { name: format!("x{}", j + 1), lower, upper, integer: false }).collect(),
        )
    }

    pub fn dims(&self) -> &[SpaceDim] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn range(&self, j: usize) -> f64 {
        self.dims[j].upper - self.dims[j].lower
    }

    pub fn v_max(&self, j: usize) -> f64 {
        VELOCITY_FRACTION * self.range(j)
    }

    pub fn sigma_max(&self, j: usize) -> f64 {
        MUTATION_FRACTION * self.range(j)
    }

    pub fn clamp(&self, j: usize, x: f64) -> f64 {
        x.clamp(self.dims[j].lower, self.dims[j].upper)
    }

    /// Rounds integer dimensions to the nearest integer.
    pub fn snap(&self, position: &[f64]) -> Vec<f64> {
        position.iter().zip(&self.dims).map(|(x, d)| if d.integer { x.round() } else { *x }).collect()
    }

    /// Named values of a position, integer dimensions rounded.
    pub fn decode(&self, position: &[f64]) -> Hyperparams {
        let mut hp = Hyperparams::new();
        for (d, x) in self.dims.iter().zip(self.snap(position)) {
            hp.set(&d.name, x);
        }
        hp
    }
}

/// Free-function form of [`HyperparamSpace::decode`].
pub fn decode_position(space: &HyperparamSpace, position: &[f64]) -> Hyperparams {
    space.decode(position)
}
