//! Newton (Gauss-Newton) iteration over the output weights for problems with
//! a `c · cos(u)` reaction term.

use std::io::Write;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_block, residual, solve_dense, DerivativeMethod, LinearSystem, Solution};
use crate::error::{invalid, Error, Result};
use crate::feature_net::FeatureNetwork;
use crate::problems::{Collocation, Hyperparams, NonlinearTerm, PdeProblem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub max_iters: usize,
    /// Stop once `‖Δα‖ / (1 + ‖α‖)` falls to this value.
    pub abs_tol: f64,
    /// Fraction of the Newton step taken, in `(0, 1]`.
    pub damping: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { max_iters: 10, abs_tol: 1e-12, damping: 1.0 }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(invalid(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(invalid("abs_tol must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonStep {
    pub iter: usize,
    /// Norm of the weighted nonlinear residual after the step.
    pub residual_norm: f64,
    /// `‖Δα‖ / (1 + ‖α‖)`.
    pub step_norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonTrace {
    pub steps: Vec<NewtonStep>,
    pub converged: bool,
}

impl NewtonTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// CSV with header `iter,residual_norm,step_norm`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "iter,residual_norm,step_norm")?;
        for s in &self.steps {
            writeln!(out, "{},{:?},{:?}", s.iter, s.residual_norm, s.step_norm)?;
        }
        Ok(())
    }
}

/// Matrices of a semilinear least-squares problem
/// `L α + c cos(Φ α) = f` (interior), `B α = g` (boundary, already weighted).
#[derive(Debug, Clone)]
pub struct NewtonParts {
    /// Linear part of the interior operator.
    pub linear: Mat<f64>,
    /// Features at the interior points.
    pub features: Mat<f64>,
    pub forcing: Vec<f64>,
    pub boundary: LinearSystem,
}

/// Gauss-Newton iteration from `α = 0`. Each step solves the minimum-norm
/// least-squares problem of the linearisation
/// `[L + diag(−c sin u_k) Φ] α = f − c cos u_k − c sin(u_k) u_k` stacked on the
/// boundary rows.
///
/// With `c = 0` the linearisation is exact and the iteration stops after one
/// step.
pub fn newton_iterate(
    parts: &NewtonParts,
    term: &NonlinearTerm,
    config: &NewtonConfig,
) -> Result<(Vec<f64>, NewtonTrace)> {
    config.validate()?;
    let (ni, cols) = (parts.linear.nrows(), parts.linear.ncols());
    if parts.features.nrows() != ni || parts.features.ncols() != cols || parts.forcing.len() != ni {
        return Err(invalid("interior matrices have inconsistent shapes"));
    }
    if parts.boundary.ncols() != cols {
        return Err(invalid("boundary rows have the wrong width"));
    }
    let nb = parts.boundary.nrows();
    let rows = ni + nb;
    let mut alpha = vec![0.0; cols];
    let mut trace = NewtonTrace::default();
    let mut a = Mat::<f64>::zeros(rows, cols);
    let mut b = vec![0.0; rows];
    a.as_mut().submatrix_mut(ni, 0, nb, cols).copy_from(parts.boundary.matrix.as_ref());
    b[ni..].copy_from_slice(&parts.boundary.rhs);

    for iter in 1..=config.max_iters {
        let u = matvec(&parts.features, &alpha);
        a.as_mut().submatrix_mut(0, 0, ni, cols).copy_from(parts.linear.as_ref());
        if term.is_linear() {
            b[..ni].copy_from_slice(&parts.forcing);
        } else {
            let slope: Vec<f64> = u.iter().map(|v| term.cos_prime(*v)).collect();
            for c in 0..cols {
                for r in 0..ni {
                    a[(r, c)] += slope[r] * parts.features[(r, c)];
                }
            }
            for r in 0..ni {
                b[r] = parts.forcing[r] - term.shift(u[r]);
            }
        }
        let sol = solve_dense(a.as_ref(), &b)?;
        let next: Vec<f64> =
            alpha.iter().zip(&sol.alpha).map(|(old, new)| old + config.damping * (new - old)).collect();
        let diff = norm(&next.iter().zip(&alpha).map(|(x, y)| x - y).collect::<Vec<_>>());
        let step_norm = diff / (1.0 + norm(&next));
        alpha = next;
        let residual_norm = nonlinear_residual(parts, term, &alpha);
        trace.steps.push(NewtonStep { iter, residual_norm, step_norm });
        if !(step_norm.is_finite() && residual_norm.is_finite()) || alpha.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { trace });
        }
        if term.is_linear() || step_norm <= config.abs_tol {
            trace.converged = true;
            break;
        }
    }
    Ok((alpha, trace))
}

/// `‖[L α + c cos(Φ α) − f ; B α − g]‖`.
pub fn nonlinear_residual(parts: &NewtonParts, term: &NonlinearTerm, alpha: &[f64]) -> f64 {
    let u = matvec(&parts.features, alpha);
    let lu = matvec(&parts.linear, alpha);
    let interior: f64 = (0..u.len())
        .map(|r| {
            let e = lu[r] + term.coefficient * u[r].cos() - parts.forcing[r];
            e * e
        })
        .sum();
    let boundary = residual(parts.boundary.matrix.as_ref(), alpha, &parts.boundary.rhs);
    (interior + boundary * boundary).sqrt()
}

/// Newton solve of a problem carrying a [`NonlinearTerm`].
pub fn newton_solve(
    problem: &PdeProblem,
    nets: &[FeatureNetwork],
    colloc: &Collocation,
    hp: &Hyperparams,
    method: DerivativeMethod,
    config: &NewtonConfig,
) -> Result<(Solution, NewtonTrace)> {
    let term = problem.nonlinear.ok_or_else(|| invalid("problem has no nonlinear term"))?;
    if nets.len() != 1 || problem.interior.len() != 1 {
        return Err(invalid("newton_solve expects a single field and a single interior equation"));
    }
    let eq = &problem.interior[0];
    let (linear, forcing) = assemble_block(nets, &eq.spec, colloc.interior.as_ref(), None, &eq.data, method)?;
    let features = nets[0].eval_features(colloc.interior.as_ref())?;

    let cols = nets[0].width();
    let rows: usize = problem.boundary.iter().zip(&colloc.boundary).map(|(s, g)| g.len() * s.equations.len()).sum();
    let mut boundary = LinearSystem::with_capacity(rows, cols);
    for (spec, group) in problem.boundary.iter().zip(&colloc.boundary) {
        let weight = hp.positive(&spec.weight)?;
        let normals = group.normals.as_ref().map(|n| n.as_ref());
        for e in &spec.equations {
            let (m, rhs) = assemble_block(nets, &e.spec, group.points.as_ref(), normals, &e.data, method)?;
            boundary.push_block(&e.label, m.as_ref(), &rhs, weight)?;
        }
    }
    let parts = NewtonParts { linear, features, forcing, boundary: boundary.finish()? };
    let (alpha, trace) = newton_iterate(&parts, &term, config)?;
    let residual_norm = trace.steps.last().map(|s| s.residual_norm).unwrap_or(f64::NAN);
    Ok((Solution::new(problem.field_names(), nets.to_vec(), alpha, residual_norm)?, trace))
}

fn matvec(m: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows()];
    for (c, xc) in x.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(m.col(c).iter()) {
            *o += v * xc;
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
