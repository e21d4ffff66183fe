use faer::Mat;

use super::{Hyperparams, PdeProblem};
use crate::assembly::{assemble_block, column_offsets, solve_min_norm_lsq, DerivativeMethod, LinearSystem, Solution};
use crate::error::{invalid, Result};
use crate::feature_net::{ActivationKind, FeatureNetwork};
use crate::geometry::{sample_boundary, sample_interior, BoundaryGroup};
use crate::nonlinear::{newton_solve, NewtonConfig, NewtonTrace};
use crate::rng::derive_seed;

/// Everything about an inner solve except the hyperparameters and the seed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverSettings {
    pub activation: ActivationKind,
    pub method: DerivativeMethod,
    pub newton: NewtonConfig,
}

/// Sampled collocation points: the interior set and one set per boundary
/// group of the problem.
#[derive(Debug, Clone)]
pub struct Collocation {
    pub interior: Mat<f64>,
    pub boundary: Vec<BoundaryGroup>,
}

/// Substream offsets of [`derive_seed`] for the pieces of an inner solve.
const INTERIOR_STREAM: u64 = 1;
const BOUNDARY_STREAM: u64 = 10;
const NETWORK_STREAM: u64 = 100;

/// One network per field, each from its own substream of `seed`.
pub fn build_networks(
    problem: &PdeProblem,
    hp: &Hyperparams,
    activation: ActivationKind,
    seed: u64,
) -> Result<Vec<FeatureNetwork>> {
    problem
        .fields
        .iter()
        .enumerate()
        .map(|(f, spec)| {
            FeatureNetwork::init(
                problem.dimension(),
                hp.count(&spec.width)?,
                hp.positive(&spec.omega)?,
                activation,
                derive_seed(seed, NETWORK_STREAM + f as u64),
            )
        })
        .collect()
}

pub fn sample_collocation(problem: &PdeProblem, hp: &Hyperparams, seed: u64) -> Result<Collocation> {
    let interior =
        sample_interior(&problem.domain, hp.count(&problem.interior_count)?, derive_seed(seed, INTERIOR_STREAM))?;
    let boundary = problem
        .boundary
        .iter()
        .enumerate()
        .map(|(g, spec)| {
            let mut group = sample_boundary(
                &problem.domain,
                hp.count(&spec.count)?,
                derive_seed(seed, BOUNDARY_STREAM + g as u64),
                spec.subset.as_deref(),
            )?;
            group.label = spec.label.clone();
            Ok(group)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Collocation { interior, boundary })
}

/// Interior equations with weight one, then every boundary equation weighted
/// by its group's λ, in declaration order.
pub fn assemble_problem(
    problem: &PdeProblem,
    nets: &[FeatureNetwork],
    colloc: &Collocation,
    hp: &Hyperparams,
    method: DerivativeMethod,
) -> Result<LinearSystem> {
    if colloc.boundary.len() != problem.boundary.len() {
        return Err(invalid("collocation does not match the problem's boundary groups"));
    }
    let cols = *column_offsets(nets).last().unwrap();
    let mut rows = colloc.interior.nrows() * problem.interior.len();
    for (spec, group) in problem.boundary.iter().zip(&colloc.boundary) {
        rows += group.len() * spec.equations.len();
    }
    let mut system = LinearSystem::with_capacity(rows, cols);
    for eq in &problem.interior {
        let (m, rhs) = assemble_block(nets, &eq.spec, colloc.interior.as_ref(), None, &eq.data, method)?;
        system.push_block(&eq.label, m.as_ref(), &rhs, 1.0)?;
    }
    for (spec, group) in problem.boundary.iter().zip(&colloc.boundary) {
        let weight = hp.positive(&spec.weight)?;
        let normals = group.normals.as_ref().map(|n| n.as_ref());
        for eq in &spec.equations {
            let (m, rhs) = assemble_block(nets, &eq.spec, group.points.as_ref(), normals, &eq.data, method)?;
            system.push_block(&eq.label, m.as_ref(), &rhs, weight)?;
        }
    }
    system.finish()
}

/// Result of one inner solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Solution,
    /// L² relative error per field on the evaluation set.
    pub field_errors: Vec<f64>,
    /// Sum of `field_errors`.
    pub fitness: f64,
    pub rows: usize,
    pub cols: usize,
    /// Present for nonlinear problems.
    pub newton: Option<NewtonTrace>,
}

/// Builds networks, samples points, assembles and solves (by Newton
/// iteration when the problem is nonlinear), then measures the error.
pub fn solve_problem(
    problem: &PdeProblem,
    hp: &Hyperparams,
    settings: &SolverSettings,
    seed: u64,
) -> Result<SolveOutcome> {
    problem.validate(hp)?;
    let nets = build_networks(problem, hp, settings.activation, seed)?;
    let colloc = sample_collocation(problem, hp, seed)?;
    let (solution, rows, cols, newton) = if problem.nonlinear.is_some() {
        let (sol, trace) = newton_solve(problem, &nets, &colloc, hp, settings.method, &settings.newton)?;
        let rows = colloc.interior.nrows() * problem.interior.len()
            + problem.boundary.iter().zip(&colloc.boundary).map(|(s, g)| g.len() * s.equations.len()).sum::<usize>();
        let cols = sol.alpha.len();
        (sol, rows, cols, Some(trace))
    } else {
        let system = assemble_problem(problem, &nets, &colloc, hp, settings.method)?;
        let (rows, cols) = (system.nrows(), system.ncols());
        let lsq = solve_min_norm_lsq(&system)?;
        drop(system);
        (Solution::new(problem.field_names(), nets, lsq.alpha, lsq.residual_norm)?, rows, cols, None)
    };
    let field_errors = problem.field_errors(&solution, DerivativeMethod::Analytic)?;
    let fitness = field_errors.iter().sum();
    Ok(SolveOutcome { solution, field_errors, fitness, rows, cols, newton })
}

/// Fitness of one inner solve; any failure or non-finite value maps to `+∞`.
pub fn inner_fitness(problem: &PdeProblem, hp: &Hyperparams, settings: &SolverSettings, seed: u64) -> f64 {
    match solve_problem(problem, hp, settings, seed) {
        Ok(out) if out.fitness.is_finite() => out.fitness,
        _ => f64::INFINITY,
    }
}
