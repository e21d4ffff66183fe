//! Central finite-difference stencils.
//!
//! All schemes are tensor products of the 1D central stencils below, which
//! reproduces the classical formulas exactly: `Mixed2` is the four-corner rule
//! over `4Δh²` and `Mixed22` the nine-point rule over `Δh⁴`.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use super::multi_index::MultiIndex;
use super::network::FeatureNetwork;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdKind {
    /// `∂/∂x_a`
    Central1,
    /// `∂²/∂x_a²`
    Central2,
    /// `∂²/∂x_a∂x_b`
    Mixed2,
    /// `∂⁴/∂x_a⁴`
    Fourth,
    /// `∂⁴/∂x_a²∂x_b²`
    Mixed22,
}

impl FdKind {
    pub fn default_step(self) -> f64 {
        match self {
            FdKind::Central1 => 1.0e-10,
            FdKind::Central2 | FdKind::Mixed2 => 1.0e-5,
            FdKind::Fourth | FdKind::Mixed22 => 3.0e-3,
        }
    }

    fn axes_needed(self) -> usize {
        match self {
            FdKind::Central1 | FdKind::Central2 | FdKind::Fourth => 1,
            FdKind::Mixed2 | FdKind::Mixed22 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdScheme {
    pub kind: FdKind,
    pub step: f64,
}

impl FdScheme {
    pub fn new(kind: FdKind, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid(format!("finite-difference step must be positive, got {step}")));
        }
        Ok(FdScheme { kind, step })
    }

    pub fn with_default_step(kind: FdKind) -> Self {
        FdScheme { kind, step: kind.default_step() }
    }

    pub fn stencil(&self, dim: usize, axes: &[usize]) -> Result<Stencil> {
        if axes.len() < self.kind.axes_needed() {
            return Err(invalid(format!("{:?} needs {} axes", self.kind, self.kind.axes_needed())));
        }
        if let Some(&bad) = axes.iter().find(|&&a| a >= dim) {
            return Err(invalid(format!("axis {bad} out of range for dimension {dim}")));
        }
        let mut orders = vec![0; dim];
        match self.kind {
            FdKind::Central1 => orders[axes[0]] = 1,
            FdKind::Central2 => orders[axes[0]] = 2,
            FdKind::Fourth => orders[axes[0]] = 4,
            FdKind::Mixed2 | FdKind::Mixed22 => {
                if axes[0] == axes[1] {
                    return Err(invalid("mixed schemes need two distinct axes"));
                }
                let o = if self.kind == FdKind::Mixed2 { 1 } else { 2 };
                orders[axes[0]] = o;
                orders[axes[1]] = o;
            }
        }
        Stencil::tensor(&orders, self.step)
    }
}

/// Step sizes used when finite differences stand in for derivative networks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    /// Total order 1.
    pub first: f64,
    /// Total order 2, including mixed second derivatives.
    pub second: f64,
    /// Total order 3 and 4.
    pub high: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps {
            first: FdKind::Central1.default_step(),
            second: FdKind::Central2.default_step(),
            high: FdKind::Fourth.default_step(),
        }
    }
}

impl FdSteps {
    pub fn for_order(&self, total: usize) -> f64 {
        match total {
            0 | 1 => self.first,
            2 => self.second,
            _ => self.high,
        }
    }
}

/// `D f(x) ≈ scale · Σ_n weight_n · f(x + step · offset_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub step: f64,
    pub nodes: Vec<(Vec<i32>, f64)>,
    pub scale: f64,
}

fn central_1d(order: usize) -> Result<(&'static [(i32, f64)], f64)> {
    Ok(match order {
        0 => (&[(0, 1.0)], 1.0),
        1 => (&[(-1, -1.0), (1, 1.0)], 2.0),
        2 => (&[(-1, 1.0), (0, -2.0), (1, 1.0)], 1.0),
        3 => (&[(-2, -1.0), (-1, 2.0), (1, -2.0), (2, 1.0)], 2.0),
        4 => (&[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)], 1.0),
        _ => return Err(Error::UnsupportedOrder { order, max: 4 }),
    })
}

impl Stencil {
    /// Tensor product of 1D central stencils with a common step.
    pub fn tensor(orders: &[usize], step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid(format!("finite-difference step must be positive, got {step}")));
        }
        let total: usize = orders.iter().sum();
        if total > 4 {
            return Err(Error::UnsupportedOrder { order: total, max: 4 });
        }
        let mut nodes = vec![(Vec::with_capacity(orders.len()), 1.0)];
        let mut denom = 1.0;
        for &o in orders {
            let (taps, d) = central_1d(o)?;
            denom *= d;
            nodes = nodes
                .into_iter()
                .flat_map(|(off, w)| {
                    taps.iter().map(move |&(t, tw)| {
                        let mut off = off.clone();
                        off.push(t);
                        (off, w * tw)
                    })
                })
                .collect();
        }
        Ok(Stencil { step, nodes, scale: 1.0 / (denom * step.powi(total as i32)) })
    }

    pub fn for_multi_index(m: &MultiIndex, steps: &FdSteps) -> Result<Self> {
        Stencil::tensor(m.orders(), steps.for_order(m.total()))
    }

    pub fn apply(&self, f: &impl Fn(&[f64]) -> f64, x: &[f64]) -> f64 {
        let mut shifted = x.to_vec();
        let mut acc = 0.0;
        for (off, w) in &self.nodes {
            for (j, o) in off.iter().enumerate() {
                shifted[j] = x[j] + *o as f64 * self.step;
            }
            acc += w * f(&shifted);
        }
        acc * self.scale
    }
}

/// Applies `scheme` along `axes` to a point-evaluable field at every row of
/// `points`.
pub fn fd_derivative(
    field: impl Fn(&[f64]) -> f64,
    scheme: &FdScheme,
    points: MatRef<'_, f64>,
    axes: &[usize],
) -> Result<Vec<f64>> {
    let stencil = scheme.stencil(points.ncols(), axes)?;
    let mut x = vec![0.0; points.ncols()];
    Ok((0..points.nrows())
        .map(|r| {
            for (j, xj) in x.iter_mut().enumerate() {
                *xj = points[(r, j)];
            }
            stencil.apply(&field, &x)
        })
        .collect())
}

/// Finite-difference replacement for
/// [`FeatureNetwork::eval_derivative_features`]: the stencil is applied to each
/// feature by evaluating the network at shifted points.
pub fn fd_derivative_features(
    net: &FeatureNetwork,
    m: &MultiIndex,
    points: MatRef<'_, f64>,
    steps: &FdSteps,
) -> Result<Mat<f64>> {
    if m.is_zero() {
        return net.eval_features(points);
    }
    if m.dim() != points.ncols() {
        return Err(invalid("multi-index dimension does not match points"));
    }
    let stencil = Stencil::for_multi_index(m, steps)?;
    let (p, n) = (points.nrows(), net.width());
    let mut acc = Mat::<f64>::zeros(p, n);
    for (off, w) in &stencil.nodes {
        let shifted = Mat::from_fn(p, points.ncols(), |r, c| points[(r, c)] + off[c] as f64 * stencil.step);
        let phi = net.eval_features(shifted.as_ref())?;
        for c in 0..n {
            for r in 0..p {
                acc[(r, c)] += w * phi[(r, c)];
            }
        }
    }
    for c in 0..n {
        for r in 0..p {
            acc[(r, c)] *= stencil.scale;
        }
    }
    Ok(acc)
}
