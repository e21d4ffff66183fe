use std::f64::consts::PI;

use faer::MatRef;
use serde::{Deserialize, Serialize};

use crate::assembly::{evaluate_solution, DerivativeMethod, Solution};
use crate::error::Result;
use crate::feature_net::MultiIndex;

/// Simply supported rectangular plate `[0, a] × [0, b]` under a sinusoidal load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateConstants {
    pub a: f64,
    pub b: f64,
    /// Thickness.
    pub h: f64,
    /// Young's modulus.
    pub e: f64,
    /// Poisson's ratio.
    pub nu: f64,
    /// Load amplitude.
    pub q0: f64,
}

impl Default for PlateConstants {
    fn default() -> Self {
        PlateConstants { a: 2.0, b: 3.0, h: 0.01, e: 2.6e2, nu: 0.25, q0: 1e-2 }
    }
}

impl PlateConstants {
    /// Flexural rigidity `E h³ / (12 (1 − ν²))`.
    pub fn rigidity(&self) -> f64 {
        self.e * self.h.powi(3) / (12.0 * (1.0 - self.nu * self.nu))
    }

    fn k(&self) -> f64 {
        1.0 / (self.a * self.a) + 1.0 / (self.b * self.b)
    }

    pub fn load(&self, x: &[f64]) -> f64 {
        self.q0 * (PI * x[0] / self.a).sin() * (PI * x[1] / self.b).sin()
    }

    pub fn deflection(&self, x: &[f64]) -> f64 {
        self.load(x) / (self.rigidity() * PI.powi(4) * self.k().powi(2))
    }

    /// Closed-form moments and shear forces of the exact deflection.
    pub fn exact_fields(&self, x: &[f64]) -> PlateFields<f64> {
        let (a, b, nu, q0, k) = (self.a, self.b, self.nu, self.q0, self.k());
        let (s1, c1) = (PI * x[0] / a).sin_cos();
        let (s2, c2) = (PI * x[1] / b).sin_cos();
        let m = q0 / (PI * PI * k * k);
        PlateFields {
            m_x1: m * (1.0 / (a * a) + nu / (b * b)) * s1 * s2,
            m_x2: m * (nu / (a * a) + 1.0 / (b * b)) * s1 * s2,
            m_x1x2: m * (1.0 - nu) / (a * b) * c1 * c2,
            q_x1: q0 / (PI * a * k) * c1 * s2,
            q_x2: q0 / (PI * b * k) * s1 * c2,
        }
    }
}

/// Bending moments `M_x1`, `M_x2`, twisting moment `M_x1x2` and shear forces
/// `Q_x1`, `Q_x2`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlateFields<T> {
    pub m_x1: T,
    pub m_x2: T,
    pub m_x1x2: T,
    pub q_x1: T,
    pub q_x2: T,
}

impl<T> PlateFields<T> {
    pub const NAMES: [&'static str; 5] = ["M_x1", "M_x2", "M_x1x2", "Q_x1", "Q_x2"];

    pub fn as_array(&self) -> [&T; 5] {
        [&self.m_x1, &self.m_x2, &self.m_x1x2, &self.q_x1, &self.q_x2]
    }
}

/// Moments and shear forces of a computed deflection field, obtained by
/// differentiating the solution.
pub fn plate_postprocess(
    solution: &Solution,
    constants: &PlateConstants,
    points: MatRef<'_, f64>,
    method: DerivativeMethod,
) -> Result<PlateFields<Vec<f64>>> {
    let field = solution.fields[0].clone();
    let d = |o1: usize, o2: usize| evaluate_solution(solution, &field, points, &MultiIndex::new(vec![o1, o2]), method);
    let (u11, u22, u12) = (d(2, 0)?, d(0, 2)?, d(1, 1)?);
    let (u111, u122, u112, u222) = (d(3, 0)?, d(1, 2)?, d(2, 1)?, d(0, 3)?);
    let dd = constants.rigidity();
    let nu = constants.nu;
    let zip = |a: &[f64], b: &[f64], f: &dyn Fn(f64, f64) -> f64| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect();
    Ok(PlateFields {
        m_x1: zip(&u11, &u22, &|p, q| -dd * (p + nu * q)),
        m_x2: zip(&u22, &u11, &|p, q| -dd * (p + nu * q)),
        m_x1x2: u12.iter().map(|v| dd * (1.0 - nu) * v).collect(),
        q_x1: zip(&u111, &u122, &|p, q| -dd * (p + q)),
        q_x2: zip(&u112, &u222, &|p, q| -dd * (p + q)),
    })
}

/// Thick-walled cylinder: annulus `a < r < b`, clamped inside, pressure `q1`
/// and shear traction `q2` outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LameConstants {
    pub e: f64,
    pub mu: f64,
    pub q1: f64,
    pub q2: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for LameConstants {
    fn default() -> Self {
        LameConstants { e: 2.1, mu: 0.25, q1: 30.0, q2: 2.0, a: 1.0, b: 2.0 }
    }
}

impl LameConstants {
    pub fn coef_a(&self) -> f64 {
        let (a, b, mu) = (self.a, self.b, self.mu);
        self.q1 * (1.0 - mu * mu) * b * b / (self.e * (b * b * (1.0 + mu) + a * a * (1.0 - mu)))
    }

    pub fn coef_b(&self) -> f64 {
        self.q2 * (1.0 + self.mu) * self.b * self.b / (self.e * self.a * self.a)
    }

    /// `E / (1 − μ²)`.
    pub fn stiffness(&self) -> f64 {
        self.e / (1.0 - self.mu * self.mu)
    }

    /// Exact displacements `(u, v)`.
    pub fn displacement(&self, x: &[f64]) -> (f64, f64) {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let s = self.a * self.a / r2;
        let (ca, cb) = (self.coef_a(), self.coef_b());
        (ca * (s - 1.0) * x[0] + cb * (1.0 - s) * x[1], ca * (s - 1.0) * x[1] - cb * (1.0 - s) * x[0])
    }
}

/// Outer-boundary traction data `(h1, h2)`.
pub fn lame_traction_rhs(_point: &[f64], normal: &[f64], q1: f64, q2: f64) -> (f64, f64) {
    let (n1, n2) = (normal[0], normal[1]);
    (-q1 * n1 + q2 * n2, -q1 * n2 - q2 * n1)
}

/// Nonlinear reaction `c · cos(u)` added to an otherwise linear operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearTerm {
    /// Coefficient of `u` in the linear part of the reaction.
    pub linear: f64,
    pub coefficient: f64,
}

impl NonlinearTerm {
    /// Full reaction `linear · u + c · cos(u)`.
    pub fn g(&self, u: f64) -> f64 {
        self.linear * u + self.coefficient * u.cos()
    }

    pub fn g_prime(&self, u: f64) -> f64 {
        self.linear - self.coefficient * u.sin()
    }

    /// `∂/∂u` of the non-linear part only.
    pub fn cos_prime(&self, u: f64) -> f64 {
        -self.coefficient * u.sin()
    }

    /// Right-hand-side shift of the linearisation about `u`:
    /// `c cos(u) + c sin(u) u`.
    pub fn shift(&self, u: f64) -> f64 {
        self.coefficient * u.cos() + self.coefficient * u.sin() * u
    }

    pub fn is_linear(&self) -> bool {
        self.coefficient == 0.0
    }
}
