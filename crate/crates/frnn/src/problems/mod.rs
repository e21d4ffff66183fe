//! The benchmark boundary-value problems: domains, operators, boundary data,
//! analytic solutions and the solve pipeline that turns hyperparameters into a
//! fitness value.

mod catalog;
mod constants;
mod hyperparams;
mod pipeline;

use std::fmt;
use std::sync::{Arc, OnceLock};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::assembly::{
    evaluate_solution, l2_relative_error, DataFn, DerivativeMethod, OperatorSpec, ScalarFn, Solution,
};
use crate::error::{invalid, Result};
use crate::feature_net::MultiIndex;
use crate::geometry::{sample_interior, Domain};

pub use catalog::{default_hyperparams, default_ranges, KOCH_GAMMA, WAVE_SPEED2};
pub use constants::{lame_traction_rhs, plate_postprocess, LameConstants, NonlinearTerm, PlateConstants, PlateFields};
pub use hyperparams::Hyperparams;
pub use pipeline::{
    assemble_problem, build_networks, inner_fitness, sample_collocation, solve_problem, Collocation, SolveOutcome,
    SolverSettings,
};

/// Seed of the fixed random evaluation sets.
pub const EVAL_SEED: u64 = 1234;

/// Problem identifier with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemId {
    /// `−u'' = f` on `[0, 1]` with `u = sin(2πx) + sin(κπx)`.
    Poisson1dSweep { kappa: f64 },
    /// `−Δu = f` on a Koch snowflake.
    KochPoisson {
        #[serde(default = "default_koch_level")]
        level: usize,
    },
    /// `u_tt − 100 u_xx = 0` on the space-time square.
    Wave1d,
    /// Kirchhoff-Love plate bending.
    Plate,
    /// `−Δu = f` on `[−1, 1]^d`.
    HighdimPoisson { d: usize },
    /// Plane-strain elasticity on an annulus.
    Lame,
    /// `Δu − 100u + c cos(u) = f` on the unit square.
    HelmholtzNl {
        #[serde(default = "default_nonlinear_coefficient")]
        coefficient: f64,
    },
}

fn default_koch_level() -> usize {
    5
}

fn default_nonlinear_coefficient() -> f64 {
    10.0
}

impl ProblemId {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemId::Poisson1dSweep { .. } => "poisson1d_sweep",
            ProblemId::KochPoisson { .. } => "koch_poisson",
            ProblemId::Wave1d => "wave1d",
            ProblemId::Plate => "plate",
            ProblemId::HighdimPoisson { .. } => "highdim_poisson",
            ProblemId::Lame => "lame",
            ProblemId::HelmholtzNl { .. } => "helmholtz_nl",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemId::Poisson1dSweep { kappa } => write!(f, "poisson1d_sweep(kappa={kappa})"),
            ProblemId::KochPoisson { level } => write!(f, "koch_poisson(level={level})"),
            ProblemId::HighdimPoisson { d } => write!(f, "highdim_poisson(d={d})"),
            ProblemId::HelmholtzNl { coefficient } => write!(f, "helmholtz_nl(c={coefficient})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Unknown field approximated by its own network.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub name: String,
    /// Hyperparameter holding the network width.
    pub width: String,
    /// Hyperparameter holding the weight range ω.
    pub omega: String,
}

/// One scalar equation: `spec(u) = data` at each point of a point set.
#[derive(Clone)]
pub struct Equation {
    pub label: String,
    pub spec: OperatorSpec,
    pub data: DataFn,
}

impl fmt::Debug for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Equation").field("label", &self.label).field("spec", &self.spec).finish_non_exhaustive()
    }
}

/// Equations enforced on one sampled boundary point set.
#[derive(Debug, Clone)]
pub struct BoundarySpec {
    pub label: String,
    /// Boundary labels passed to [`crate::geometry::sample_boundary`];
    /// `None` is the whole boundary.
    pub subset: Option<String>,
    /// Hyperparameter holding the number of points.
    pub count: String,
    /// Hyperparameter holding the penalty weight λ.
    pub weight: String,
    pub equations: Vec<Equation>,
}

pub struct PdeProblem {
    pub id: ProblemId,
    pub domain: Domain,
    pub fields: Vec<FieldSpec>,
    /// Hyperparameter holding the number of interior points.
    pub interior_count: String,
    pub interior: Vec<Equation>,
    pub boundary: Vec<BoundarySpec>,
    /// Exact solution, one per field.
    pub analytic: Vec<ScalarFn>,
    pub nonlinear: Option<NonlinearTerm>,
    pub plate: Option<PlateConstants>,
    pub lame: Option<LameConstants>,
    eval_seed: u64,
    eval_points: OnceLock<Mat<f64>>,
}

impl fmt::Debug for PdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeProblem")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("fields", &self.fields)
            .field("interior", &self.interior)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

/// Builds the problem for `id`.
pub fn make_problem(id: ProblemId) -> Result<PdeProblem> {
    catalog::build(id)
}

impl PdeProblem {
    /// Replaces the seed of the random evaluation set (default [`EVAL_SEED`]).
    pub fn with_eval_seed(mut self, seed: u64) -> Self {
        self.eval_seed = seed;
        self.eval_points = OnceLock::new();
        self
    }

    pub fn eval_seed(&self) -> u64 {
        self.eval_seed
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn field_names(&self) -> Vec<String> {
        self.fields.iter().map(|f| f.name.clone()).collect()
    }

    /// Every hyperparameter name the problem reads, in a fixed order.
    pub fn required_params(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |s: &String| {
            if !out.contains(s) {
                out.push(s.clone());
            }
        };
        for f in &self.fields {
            push(&f.width);
        }
        for f in &self.fields {
            push(&f.omega);
        }
        for b in &self.boundary {
            push(&b.weight);
        }
        push(&self.interior_count);
        for b in &self.boundary {
            push(&b.count);
        }
        out
    }

    /// Checks that every required hyperparameter is present and valid.
    pub fn validate(&self, hp: &Hyperparams) -> Result<()> {
        for f in &self.fields {
            hp.count(&f.width)?;
            hp.positive(&f.omega)?;
        }
        hp.count(&self.interior_count)?;
        for b in &self.boundary {
            hp.count(&b.count)?;
            hp.positive(&b.weight)?;
        }
        Ok(())
    }

    pub fn analytic_values(&self, field: usize, points: faer::MatRef<'_, f64>) -> Vec<f64> {
        let f = &self.analytic[field];
        let mut x = vec![0.0; points.ncols()];
        (0..points.nrows())
            .map(|r| {
                for (j, v) in x.iter_mut().enumerate() {
                    *v = points[(r, j)];
                }
                f(&x)
            })
            .collect()
    }

    /// Fixed point set on which errors are measured: a 1000-point grid in 1D,
    /// a 100 × 100 grid for rectangles, and 10 000 seeded interior samples for
    /// the Koch snowflake, the annulus and dimensions above two.
    pub fn evaluation_points(&self) -> Result<&Mat<f64>> {
        if let Some(p) = self.eval_points.get() {
            return Ok(p);
        }
        let pts = match &self.domain {
            Domain::Box { lo, hi } if lo.len() == 1 => {
                Mat::from_fn(1000, 1, |i, _| lo[0] + (hi[0] - lo[0]) * i as f64 / 999.0)
            }
            Domain::Box { lo, hi } if lo.len() == 2 => Mat::from_fn(100 * 100, 2, |i, j| {
                let k = if j == 0 { i / 100 } else { i % 100 };
                lo[j] + (hi[j] - lo[j]) * k as f64 / 99.0
            }),
            other => sample_interior(other, 10_000, self.eval_seed)?,
        };
        Ok(self.eval_points.get_or_init(|| pts))
    }

    /// L² relative error of each field on the evaluation set.
    pub fn field_errors(&self, solution: &Solution, method: DerivativeMethod) -> Result<Vec<f64>> {
        let pts = self.evaluation_points()?;
        let zero = MultiIndex::zero(self.dimension());
        (0..self.fields.len())
            .map(|f| {
                let pred = evaluate_solution(solution, &self.fields[f].name, pts.as_ref(), &zero, method)?;
                l2_relative_error(&pred, &self.analytic_values(f, pts.as_ref()))
            })
            .collect()
    }

    /// Sum of the per-field errors.
    pub fn fitness(&self, solution: &Solution) -> Result<f64> {
        Ok(self.field_errors(solution, DerivativeMethod::Analytic)?.iter().sum())
    }
}

/// Fitness of a solution: the L² relative error, summed over fields.
pub fn fitness(problem: &PdeProblem, solution: &Solution) -> Result<f64> {
    problem.fitness(solution)
}

pub(crate) fn data_fn(f: impl Fn(&[f64], Option<&[f64]>) -> f64 + Send + Sync + 'static) -> DataFn {
    Arc::new(f)
}

pub(crate) fn scalar_fn(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

pub(crate) fn unknown_param(name: &str) -> crate::Error {
    invalid(format!("missing hyperparameter `{name}`"))
}
