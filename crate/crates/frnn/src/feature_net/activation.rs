use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order any activation supports.
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    #[default]
    Sine,
    Sigmoid,
    Swish,
    Tanh,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 4] =
        [ActivationKind::Sine, ActivationKind::Sigmoid, ActivationKind::Swish, ActivationKind::Tanh];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sine => "sine",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Swish => "swish",
            ActivationKind::Tanh => "tanh",
        }
    }

    /// Exact derivative `ρ^(order)(z)`.
    pub fn derivative(self, order: usize, z: f64) -> Result<f64> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder { order, max: MAX_ORDER });
        }
        Ok(self.derivative_unchecked(order, z))
    }

    /// Same as [`derivative`](Self::derivative) with `order <= 4` assumed.
    #[inline]
    pub(crate) fn derivative_unchecked(self, order: usize, z: f64) -> f64 {
        match self {
            ActivationKind::Sine => match order % 4 {
                0 => z.sin(),
                1 => z.cos(),
                2 => -z.sin(),
                _ => -z.cos(),
            },
            ActivationKind::Sigmoid => sigmoid_derivative(order, sigmoid(z)),
            ActivationKind::Tanh => tanh_derivative(order, z.tanh()),
            ActivationKind::Swish => {
                // (z σ)^(n) = z σ^(n) + n σ^(n-1)
                let s = sigmoid(z);
                let mut value = z * sigmoid_derivative(order, s);
                if order > 0 {
                    value += order as f64 * sigmoid_derivative(order - 1, s);
                }
                value
            }
        }
    }
}

impl std::fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" | "sin" => Ok(ActivationKind::Sine),
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "swish" => Ok(ActivationKind::Swish),
            "tanh" => Ok(ActivationKind::Tanh),
            other => Err(Error::InvalidArgument(format!("unknown activation `{other}`"))),
        }
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Derivatives of σ written as polynomials in s = σ(z).
#[inline]
fn sigmoid_derivative(order: usize, s: f64) -> f64 {
    let ds = s * (1.0 - s);
    match order {
        0 => s,
        1 => ds,
        2 => ds * (1.0 - 2.0 * s),
        3 => ds * (1.0 - 6.0 * s + 6.0 * s * s),
        _ => ds * (1.0 - 2.0 * s) * (1.0 - 12.0 * s + 12.0 * s * s),
    }
}

/// Derivatives of tanh written as polynomials in t = tanh(z).
#[inline]
fn tanh_derivative(order: usize, t: f64) -> f64 {
    let dt = 1.0 - t * t;
    match order {
        0 => t,
        1 => dt,
        2 => -2.0 * t * dt,
        3 => -2.0 * dt * (1.0 - 3.0 * t * t),
        _ => 8.0 * t * dt * (2.0 - 3.0 * t * t),
    }
}
