use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use super::{
    data_fn, lame_traction_rhs, scalar_fn, BoundarySpec, Equation, FieldSpec, Hyperparams, LameConstants,
    NonlinearTerm, PdeProblem, PlateConstants, ProblemId,
};
use crate::assembly::{Coefficient, OperatorSpec};
use crate::error::{invalid, Result};
use crate::feature_net::MultiIndex;
use crate::geometry::Domain;

/// Frequency of the Koch manufactured solution.
pub const KOCH_GAMMA: f64 = 15.0 * PI;

/// Squared wave speed.
pub const WAVE_SPEED2: f64 = 100.0;

pub(super) fn build(id: ProblemId) -> Result<PdeProblem> {
    match id {
        ProblemId::Poisson1dSweep { kappa } => sweep(id, kappa),
        ProblemId::KochPoisson { level } => koch(id, level),
        ProblemId::Wave1d => wave(id),
        ProblemId::Plate => plate(id),
        ProblemId::HighdimPoisson { d } => highdim(id, d),
        ProblemId::Lame => lame(id),
        ProblemId::HelmholtzNl { coefficient } => helmholtz(id, coefficient),
    }
}

fn scalar_field() -> Vec<FieldSpec> {
    vec![FieldSpec { name: "u".into(), width: "N".into(), omega: "omega".into() }]
}

fn problem(
    id: ProblemId,
    domain: Domain,
    fields: Vec<FieldSpec>,
    interior: Vec<Equation>,
    boundary: Vec<BoundarySpec>,
) -> PdeProblem {
    PdeProblem {
        id,
        domain,
        fields,
        interior_count: "N1".into(),
        interior,
        boundary,
        analytic: Vec::new(),
        nonlinear: None,
        plate: None,
        lame: None,
        eval_seed: super::EVAL_SEED,
        eval_points: OnceLock::new(),
    }
}

fn eq(label: &str, spec: OperatorSpec, data: super::DataFn) -> Equation {
    Equation { label: label.into(), spec, data }
}

fn group(label: &str, subset: Option<&str>, count: &str, weight: &str, equations: Vec<Equation>) -> BoundarySpec {
    BoundarySpec {
        label: label.into(),
        subset: subset.map(str::to_string),
        count: count.into(),
        weight: weight.into(),
        equations,
    }
}

/// Dirichlet data taken from the exact solution.
fn dirichlet(dim: usize, u: &super::ScalarFn) -> Equation {
    let u = u.clone();
    eq("dirichlet", OperatorSpec::identity(dim, 0), data_fn(move |x, _| u(x)))
}

fn sweep(id: ProblemId, kappa: f64) -> Result<PdeProblem> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid(format!("kappa must be positive, got {kappa}")));
    }
    let u = scalar_fn(move |x| (2.0 * PI * x[0]).sin() + (kappa * PI * x[0]).sin());
    let f =
        data_fn(move |x, _| 4.0 * PI * PI * (2.0 * PI * x[0]).sin() + (kappa * PI).powi(2) * (kappa * PI * x[0]).sin());
    let mut p = problem(
        id,
        Domain::new_box(vec![0.0], vec![1.0])?,
        scalar_field(),
        vec![eq("interior", OperatorSpec::laplacian(1, 0, -1.0), f)],
        vec![group("boundary", None, "N2", "lambda", vec![dirichlet(1, &u)])],
    );
    p.analytic = vec![u];
    Ok(p)
}

fn koch(id: ProblemId, level: usize) -> Result<PdeProblem> {
    let g = KOCH_GAMMA;
    let u = scalar_fn(move |x| (g * x[0]).sin() * (g * x[1]).sin());
    let f = data_fn(move |x, _| 2.0 * g * g * (g * x[0]).sin() * (g * x[1]).sin());
    let mut p = problem(
        id,
        Domain::koch(level)?,
        scalar_field(),
        vec![eq("interior", OperatorSpec::laplacian(2, 0, -1.0), f)],
        vec![group("boundary", None, "N2", "lambda", vec![dirichlet(2, &u)])],
    );
    p.analytic = vec![u];
    Ok(p)
}

/// Coordinates are `(x, t)`.
fn wave(id: ProblemId) -> Result<PdeProblem> {
    let c = WAVE_SPEED2.sqrt();
    let u = scalar_fn(move |x| {
        (PI * x[0]).sin() * (c * PI * x[1]).cos() + (2.0 * PI * x[0]).sin() * (2.0 * c * PI * x[1]).cos()
    });
    let op = OperatorSpec::new().constant(1.0, MultiIndex::axis(2, 1, 2), 0).constant(
        -WAVE_SPEED2,
        MultiIndex::axis(2, 0, 2),
        0,
    );
    let velocity =
        eq("initial_velocity", OperatorSpec::new().constant(1.0, MultiIndex::axis(2, 1, 1), 0), data_fn(|_, _| 0.0));
    let mut p = problem(
        id,
        Domain::rectangle(1.0, 1.0)?,
        scalar_field(),
        vec![eq("interior", op, data_fn(|_, _| 0.0))],
        vec![
            group("dirichlet", Some("x1:lo,x1:hi,x2:lo"), "N2", "lambda1", vec![dirichlet(2, &u)]),
            group("neumann", Some("x2:lo"), "N3", "lambda2", vec![velocity]),
        ],
    );
    p.analytic = vec![u];
    Ok(p)
}

fn plate(id: ProblemId) -> Result<PdeProblem> {
    let c = PlateConstants::default();
    let d = c.rigidity();
    let nu = c.nu;
    let biharmonic = OperatorSpec::new()
        .constant(d, MultiIndex::axis(2, 0, 4), 0)
        .constant(2.0 * d, MultiIndex::new(vec![2, 2]), 0)
        .constant(d, MultiIndex::axis(2, 1, 4), 0);
    // bending moment normal to the edge: M_x1 on x1 = const faces, M_x2 on x2 = const faces
    let moment = OperatorSpec::new()
        .term(
            Coefficient::Normal(Arc::new(move |n| -d * (n[0] * n[0] + nu * n[1] * n[1]))),
            MultiIndex::axis(2, 0, 2),
            0,
        )
        .term(
            Coefficient::Normal(Arc::new(move |n| -d * (n[1] * n[1] + nu * n[0] * n[0]))),
            MultiIndex::axis(2, 1, 2),
            0,
        );
    let u = scalar_fn(move |x| c.deflection(x));
    let mut p = problem(
        id,
        Domain::rectangle(c.a, c.b)?,
        scalar_field(),
        vec![eq("interior", biharmonic, data_fn(move |x, _| c.load(x)))],
        vec![
            group(
                "displacement",
                None,
                "N2",
                "lambda1",
                vec![eq("displacement", OperatorSpec::identity(2, 0), data_fn(|_, _| 0.0))],
            ),
            group("moment", None, "N3", "lambda2", vec![eq("moment", moment, data_fn(|_, _| 0.0))]),
        ],
    );
    p.analytic = vec![u];
    p.plate = Some(c);
    Ok(p)
}

fn highdim(id: ProblemId, d: usize) -> Result<PdeProblem> {
    if d < 2 {
        return Err(invalid(format!("highdim_poisson needs d >= 2, got {d}")));
    }
    let mean = move |x: &[f64]| x.iter().sum::<f64>() / d as f64;
    let u = scalar_fn(move |x| {
        let s = mean(x);
        s * s + s.sin()
    });
    let f = data_fn(move |x, _| (mean(x).sin() - 2.0) / d as f64);
    let mut p = problem(
        id,
        Domain::hypercube(d, -1.0, 1.0)?,
        scalar_field(),
        vec![eq("interior", OperatorSpec::laplacian(d, 0, -1.0), f)],
        vec![group("boundary", None, "N2", "lambda", vec![dirichlet(d, &u)])],
    );
    p.analytic = vec![u];
    Ok(p)
}

fn lame(id: ProblemId) -> Result<PdeProblem> {
    let c = LameConstants::default();
    let k = c.stiffness();
    let mu = c.mu;
    let half = (1.0 - mu) / 2.0;
    let plus = (1.0 + mu) / 2.0;
    let (xx, yy, xy) = (MultiIndex::axis(2, 0, 2), MultiIndex::axis(2, 1, 2), MultiIndex::pair(2, 0, 1));
    let (dx, dy) = (MultiIndex::axis(2, 0, 1), MultiIndex::axis(2, 1, 1));
    let f1 = OperatorSpec::new().constant(k, xx.clone(), 0).constant(k * half, yy.clone(), 0).constant(
        k * plus,
        xy.clone(),
        1,
    );
    let f2 = OperatorSpec::new().constant(k * plus, xy, 0).constant(k, yy, 1).constant(k * half, xx, 1);
    let n1 = |s: f64| Coefficient::Normal(Arc::new(move |n: &[f64]| s * n[0]));
    let n2 = |s: f64| Coefficient::Normal(Arc::new(move |n: &[f64]| s * n[1]));
    let b1 = OperatorSpec::new()
        .term(n1(k), dx.clone(), 0)
        .term(n2(k * half), dy.clone(), 0)
        .term(n1(k * mu), dy.clone(), 1)
        .term(n2(k * half), dx.clone(), 1);
    let b2 = OperatorSpec::new()
        .term(n2(k * mu), dx.clone(), 0)
        .term(n1(k * half), dy.clone(), 0)
        .term(n2(k), dy, 1)
        .term(n1(k * half), dx, 1);
    let (q1, q2) = (c.q1, c.q2);
    let zero = || data_fn(|_, _| 0.0);
    let fields = vec![
        FieldSpec { name: "u".into(), width: "N_u".into(), omega: "omega1".into() },
        FieldSpec { name: "v".into(), width: "N_v".into(), omega: "omega2".into() },
    ];
    let mut p = problem(
        id,
        Domain::annulus(c.a, c.b)?,
        fields,
        vec![eq("equilibrium_x1", f1, zero()), eq("equilibrium_x2", f2, zero())],
        vec![
            group(
                "outer",
                Some("outer"),
                "N2",
                "lambda1",
                vec![
                    eq("traction_x1", b1, data_fn(move |x, n| lame_traction_rhs(x, n.unwrap(), q1, q2).0)),
                    eq("traction_x2", b2, data_fn(move |x, n| lame_traction_rhs(x, n.unwrap(), q1, q2).1)),
                ],
            ),
            group(
                "inner",
                Some("inner"),
                "N3",
                "lambda2",
                vec![
                    eq("clamp_u", OperatorSpec::identity(2, 0), zero()),
                    eq("clamp_v", OperatorSpec::identity(2, 1), zero()),
                ],
            ),
        ],
    );
    p.analytic = vec![scalar_fn(move |x| c.displacement(x).0), scalar_fn(move |x| c.displacement(x).1)];
    p.lame = Some(c);
    Ok(p)
}

/// Linear part `Δu − 100u`; the `c cos(u)` term is carried by
/// [`NonlinearTerm`].
fn helmholtz(id: ProblemId, coefficient: f64) -> Result<PdeProblem> {
    if !coefficient.is_finite() {
        return Err(invalid("nonlinear coefficient must be finite"));
    }
    let term = NonlinearTerm { linear: -100.0, coefficient };
    let a = 3.0 * PI;
    let u = scalar_fn(move |x| 4.0 * (a * x[0] * x[0]).cos() * (a * x[1] * x[1]).sin());
    let f = data_fn(move |x, _| {
        let (s1, c1) = (a * x[0] * x[0]).sin_cos();
        let (s2, c2) = (a * x[1] * x[1]).sin_cos();
        let uxx = 4.0 * s2 * (-2.0 * a * s1 - 4.0 * a * a * x[0] * x[0] * c1);
        let uyy = 4.0 * c1 * (2.0 * a * c2 - 4.0 * a * a * x[1] * x[1] * s2);
        let u = 4.0 * c1 * s2;
        uxx + uyy + term.g(u)
    });
    let op = OperatorSpec::laplacian(2, 0, 1.0).constant(term.linear, MultiIndex::zero(2), 0);
    let mut p = problem(
        id,
        Domain::rectangle(1.0, 1.0)?,
        scalar_field(),
        vec![eq("interior", op, f)],
        vec![group("boundary", None, "N2", "lambda", vec![dirichlet(2, &u)])],
    );
    p.analytic = vec![u];
    p.nonlinear = Some(term);
    Ok(p)
}

/// Tuned hyperparameters for each benchmark. For the sweep problem only `N`
/// is fixed; the rest are plain defaults.
pub fn default_hyperparams(id: ProblemId) -> Hyperparams {
    let pairs: &[(&str, f64)] = match id {
        ProblemId::Poisson1dSweep { .. } => {
            &[("N", 100.0), ("omega", 80.0), ("lambda", 10.0), ("N1", 1000.0), ("N2", 20.0)]
        }
        ProblemId::KochPoisson { .. } => {
            &[("N", 2000.0), ("omega", 69.583), ("lambda", 2002.105), ("N1", 2650.0), ("N2", 3000.0)]
        }
        ProblemId::Wave1d => &[
            ("N", 2995.0),
            ("omega", 70.255),
            ("lambda1", 9438.998),
            ("lambda2", 9622.454),
            ("N1", 3000.0),
            ("N2", 3000.0),
            ("N3", 50.0),
        ],
        ProblemId::Plate => &[
            ("N", 707.0),
            ("omega", 2.607),
            ("lambda1", 0.002),
            ("lambda2", 8.441),
            ("N1", 787.0),
            ("N2", 1508.0),
            ("N3", 2951.0),
        ],
        ProblemId::HighdimPoisson { d } if d >= 10 => {
            &[("N", 4793.0), ("omega", 0.091), ("lambda", 165.799), ("N1", 19889.0), ("N2", 14342.0)]
        }
        ProblemId::HighdimPoisson { .. } => {
            &[("N", 1983.0), ("omega", 0.219), ("lambda", 4895.903), ("N1", 8510.0), ("N2", 13196.0)]
        }
        ProblemId::Lame => &[
            ("N_u", 1374.0),
            ("N_v", 1526.0),
            ("omega1", 20.358),
            ("omega2", 20.882),
            ("lambda1", 8819.374),
            ("lambda2", 7173.623),
            ("N1", 5000.0),
            ("N2", 2619.0),
            ("N3", 1513.0),
        ],
        ProblemId::HelmholtzNl { .. } => {
            &[("N", 2000.0), ("omega", 87.857), ("lambda", 585.640), ("N1", 2995.0), ("N2", 2974.0)]
        }
    };
    Hyperparams::from_pairs(pairs.iter().copied())
}

/// Search ranges `(name, lower, upper, integer)` used for the benchmarks.
pub fn default_ranges(id: ProblemId) -> Vec<(&'static str, f64, f64, bool)> {
    const LAMBDA: (f64, f64) = (1e-4, 1e4);
    let count = |name, hi| (name, 10.0, hi, true);
    let lambda = |name| (name, LAMBDA.0, LAMBDA.1, false);
    match id {
        ProblemId::Poisson1dSweep { .. } => {
            vec![("omega", 1e-4, 100.0, false), lambda("lambda"), count("N1", 3000.0), count("N2", 3000.0)]
        }
        ProblemId::KochPoisson { .. } | ProblemId::HelmholtzNl { .. } => vec![
            count("N", 2000.0),
            ("omega", 1e-4, 100.0, false),
            lambda("lambda"),
            count("N1", 3000.0),
            count("N2", 3000.0),
        ],
        ProblemId::Wave1d | ProblemId::Plate => {
            let omega_hi = if id == ProblemId::Plate { 10.0 } else { 100.0 };
            vec![
                count("N", 2000.0),
                ("omega", 1e-4, omega_hi, false),
                lambda("lambda1"),
                lambda("lambda2"),
                count("N1", 3000.0),
                count("N2", 3000.0),
                count("N3", 3000.0),
            ]
        }
        ProblemId::HighdimPoisson { d } => vec![
            count("N", if d >= 10 { 5000.0 } else { 2000.0 }),
            ("omega", 1e-4, 10.0, false),
            lambda("lambda"),
            count("N1", 20000.0),
            count("N2", 20000.0),
        ],
        ProblemId::Lame => vec![
            count("N_u", 2000.0),
            count("N_v", 2000.0),
            ("omega1", 1e-4, 50.0, false),
            ("omega2", 1e-4, 50.0, false),
            lambda("lambda1"),
            lambda("lambda2"),
            count("N1", 5000.0),
            count("N2", 3000.0),
            count("N3", 3000.0),
        ],
    }
}
