use faer::{Mat, MatRef};
use rand::distr::{Distribution, Uniform};

use super::activation::{ActivationKind, MAX_ORDER};
use super::multi_index::MultiIndex;
use crate::error::{invalid, Error, Result};
use crate::rng::rng_for;

/// Single-hidden-layer network with frozen random weights.
///
/// Neuron `i` computes `φ_i(x) = ρ(Σ_j w_ij x_j + b_i)`. Weights and biases
/// are drawn uniformly from `[-ω, ω]` by a `ChaCha8Rng` seeded with `seed`:
/// first all weights in row-major order (neuron by neuron), then all biases.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureNetwork {
    input_dim: usize,
    width: usize,
    /// Row-major `width × input_dim`.
    weights: Vec<f64>,
    biases: Vec<f64>,
    omega: f64,
    activation: ActivationKind,
    seed: u64,
}

impl FeatureNetwork {
    pub fn init(input_dim: usize, width: usize, omega: f64, activation: ActivationKind, seed: u64) -> Result<Self> {
        if input_dim == 0 || width == 0 {
            return Err(invalid(format!("network dimensions must be positive (input_dim={input_dim}, width={width})")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid(format!("omega must be positive and finite, got {omega}")));
        }
        let dist = Uniform::new_inclusive(-omega, omega).map_err(|e| invalid(e.to_string()))?;
        let mut rng = rng_for(seed);
        let weights: Vec<f64> = (0..width * input_dim).map(|_| dist.sample(&mut rng)).collect();
        let biases: Vec<f64> = (0..width).map(|_| dist.sample(&mut rng)).collect();
        Ok(FeatureNetwork { input_dim, width, weights, biases, omega, activation, seed })
    }

    /// Builds a network from explicit parameters (`weights` row-major).
    pub fn from_parts(
        input_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: ActivationKind,
    ) -> Result<Self> {
        let width = biases.len();
        if input_dim == 0 || width == 0 || weights.len() != width * input_dim {
            return Err(invalid("weights must be width × input_dim with width, input_dim ≥ 1"));
        }
        let omega = weights.iter().chain(&biases).fold(0.0_f64, |acc, v| acc.max(v.abs()));
        Ok(FeatureNetwork { input_dim, width, weights, biases, omega, activation, seed: 0 })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weight(&self, neuron: usize, axis: usize) -> f64 {
        self.weights[neuron * self.input_dim + axis]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    fn check_points(&self, points: MatRef<'_, f64>) -> Result<()> {
        if points.ncols() != self.input_dim {
            return Err(invalid(format!("points have {} columns, network expects {}", points.ncols(), self.input_dim)));
        }
        Ok(())
    }

    /// Pre-activations `z_pi = Σ_j w_ij x_pj + b_i`, shape `P × N`.
    pub fn pre_activations(&self, points: MatRef<'_, f64>) -> Result<Mat<f64>> {
        self.check_points(points)?;
        let p = points.nrows();
        let k = self.input_dim;
        let mut z = Mat::<f64>::zeros(p, self.width);
        for i in 0..self.width {
            let w = &self.weights[i * k..(i + 1) * k];
            let b = self.biases[i];
            let col = z.col_mut(i).try_as_col_major_mut().unwrap().as_slice_mut();
            for (r, out) in col.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, wj) in w.iter().enumerate() {
                    acc += wj * points[(r, j)];
                }
                *out = acc + b;
            }
        }
        Ok(z)
    }

    /// Feature matrix `Φ[p, i] = φ_i(x_p)`.
    pub fn eval_features(&self, points: MatRef<'_, f64>) -> Result<Mat<f64>> {
        let mut z = self.pre_activations(points)?;
        let act = self.activation;
        for i in 0..z.ncols() {
            for v in z.col_mut(i).iter_mut() {
                *v = act.derivative_unchecked(0, *v);
            }
        }
        Ok(z)
    }

    /// Exact `∂^m φ_i(x_p)` through the derivative network
    /// `(Π_j w_ij^{m_j}) · ρ^{(|m|)}(z_pi)`.
    pub fn eval_derivative_features(&self, m: &MultiIndex, points: MatRef<'_, f64>) -> Result<Mat<f64>> {
        let mut basis = DerivativeBasis::new(self, points)?;
        basis.derivative(m)
    }

    /// `Π_j w_ij^{m_j}` for every neuron.
    pub fn weight_products(&self, m: &MultiIndex) -> Vec<f64> {
        (0..self.width)
            .map(|i| {
                let mut prod = 1.0;
                for (j, &mj) in m.orders().iter().enumerate() {
                    for _ in 0..mj {
                        prod *= self.weight(i, j);
                    }
                }
                prod
            })
            .collect()
    }
}

/// Pre-activations at a fixed point set plus lazily evaluated activation
/// derivatives, so that several multi-indices over the same points share the
/// expensive transcendental evaluations.
pub struct DerivativeBasis<'a> {
    net: &'a FeatureNetwork,
    z: Mat<f64>,
    // For sine only orders 0 (sin) and 1 (cos) are stored; higher orders are
    // signed copies.
    cache: [Option<Mat<f64>>; MAX_ORDER + 1],
}

impl<'a> DerivativeBasis<'a> {
    pub fn new(net: &'a FeatureNetwork, points: MatRef<'_, f64>) -> Result<Self> {
        let z = net.pre_activations(points)?;
        Ok(DerivativeBasis { net, z, cache: Default::default() })
    }

    pub fn nrows(&self) -> usize {
        self.z.nrows()
    }

    /// Returns `(sign, A)` with `ρ^(order)(Z) = sign · A`.
    pub fn activation(&mut self, order: usize) -> Result<(f64, &Mat<f64>)> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder { order, max: MAX_ORDER });
        }
        let act = self.net.activation();
        let (slot, sign) = match act {
            ActivationKind::Sine => (order % 2, if order % 4 < 2 { 1.0 } else { -1.0 }),
            _ => (order, 1.0),
        };
        if self.cache[slot].is_none() {
            let z = &self.z;
            let a = Mat::from_fn(z.nrows(), z.ncols(), |r, c| act.derivative_unchecked(slot, z[(r, c)]));
            self.cache[slot] = Some(a);
        }
        Ok((sign, self.cache[slot].as_ref().unwrap()))
    }

    pub fn derivative(&mut self, m: &MultiIndex) -> Result<Mat<f64>> {
        if m.dim() != self.net.input_dim() {
            return Err(invalid(format!(
                "multi-index {m} has dimension {}, network has {}",
                m.dim(),
                self.net.input_dim()
            )));
        }
        let scale = self.net.weight_products(m);
        let (sign, a) = self.activation(m.total())?;
        Ok(Mat::from_fn(a.nrows(), a.ncols(), |r, c| scale[c] * (sign * a[(r, c)])))
    }
}
