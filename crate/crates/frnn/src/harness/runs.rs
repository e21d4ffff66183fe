use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use super::config::{DerivativeKind, ExperimentConfig};
use super::report::{ReportEntry, RunReport};
use crate::assembly::{evaluate_solution, DerivativeMethod};
use crate::error::{invalid, Error, Result};
use crate::feature_net::{ActivationKind, MultiIndex};
use crate::optimizer::{optimize, write_trace_csv};
use crate::problems::{
    inner_fitness, make_problem, default_hyperparams, plate_postprocess, solve_problem, Hyperparams, PdeProblem, PlateFields,
    ProblemId, SolveOutcome,
};

/// The four run modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Optimize,
    Sweep,
    Dbench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::Dbench => "dbench",
        }
    }

    pub fn run(self, config: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
        match self {
            Command::Solve => run_solve(config, out_dir),
            Command::Optimize => run_optimize(config, out_dir),
            Command::Sweep => run_sweep(config, out_dir),
            Command::Dbench => run_derivative_bench(config, out_dir),
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Command::Solve, Command::Optimize, Command::Sweep, Command::Dbench]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| invalid(format!("unknown command `{s}`")))
    }
}

/// `--out` if given, else `[output] dir` (relative paths resolved against the
/// config file's directory), else `out`.
pub fn resolve_output_dir(config: &ExperimentConfig, config_path: Option<&Path>, cli: Option<&Path>) -> PathBuf {
    if let Some(dir) = cli {
        return dir.to_path_buf();
    }
    match (&config.output.dir, config_path.and_then(Path::parent)) {
        (Some(dir), Some(base)) if dir.is_relative() => base.join(dir),
        (Some(dir), _) => dir.clone(),
        (None, _) => PathBuf::from("out"),
    }
}

struct Outputs<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs { dir, written: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let file = File::create(&path)?;
        self.written.push(path);
        Ok(BufWriter::new(file))
    }

    fn finish(mut self, mut report: RunReport) -> Result<RunReport> {
        let path = self.dir.join("report.json");
        self.written.push(path.clone());
        report.artifacts = self.written;
        report.write_json(&path)?;
        Ok(report)
    }
}

fn report(command: Command, config: &ExperimentConfig, started: Instant) -> RunReport {
    RunReport {
        command: command.name().into(),
        problem: config.problem.to_string(),
        seeds: config.seeds,
        wall_seconds: started.elapsed().as_secs_f64(),
        entries: Vec::new(),
        summary: BTreeMap::new(),
        artifacts: Vec::new(),
    }
}

fn fmt_row(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

fn outcome_entry(
    label: impl Into<String>,
    problem: &PdeProblem,
    activation: ActivationKind,
    derivative: DerivativeKind,
    hp: &Hyperparams,
    out: &SolveOutcome,
    seconds: f64,
) -> ReportEntry {
    let mut entry = ReportEntry::new(label, activation, derivative, hp.clone());
    for (name, err) in problem.field_names().into_iter().zip(&out.field_errors) {
        entry.fvals.insert(name, *err);
    }
    entry.fitness = out.fitness;
    entry.residual_norm = Some(out.solution.residual_norm);
    entry.rows = Some(out.rows);
    entry.cols = Some(out.cols);
    entry.newton_iterations = out.newton.as_ref().map(|t| t.len());
    entry.seconds = seconds;
    entry
}

/// One inner solve with the configured hyperparameters. Writes `solution.csv`
/// on the evaluation set, plus `plate_fields.csv` and `newton_trace.csv` when
/// they apply.
pub fn run_solve(config: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let started = Instant::now();
    let hp = config.hyperparams.clone().ok_or_else(|| Error::Config("`solve` needs a [hyperparams] table".into()))?;
    let problem = config.build_problem()?;
    problem.validate(&hp)?;
    let settings = config.solver.settings(config.solver.activation, config.solver.derivative);
    let mut files = Outputs::new(out_dir)?;

    let t = Instant::now();
    let out = solve_problem(&problem, &hp, &settings, config.seeds.inner)?;
    let seconds = t.elapsed().as_secs_f64();
    let mut entry =
        outcome_entry("solve", &problem, config.solver.activation, config.solver.derivative, &hp, &out, seconds);

    let pts = problem.evaluation_points()?;
    let zero = MultiIndex::zero(problem.dimension());
    let mut columns = Vec::new();
    let mut header: Vec<String> = (1..=problem.dimension()).map(|j| format!("x{j}")).collect();
    for (f, name) in problem.field_names().iter().enumerate() {
        let pred = evaluate_solution(&out.solution, name, pts.as_ref(), &zero, DerivativeMethod::Analytic)?;
        let exact = problem.analytic_values(f, pts.as_ref());
        header.extend([format!("predicted_{name}"), format!("analytic_{name}"), format!("abs_error_{name}")]);
        columns.push((pred, exact));
    }
    let mut w = files.create("solution.csv")?;
    writeln!(w, "{}", header.join(","))?;
    for r in 0..pts.nrows() {
        let mut row: Vec<f64> = (0..pts.ncols()).map(|j| pts[(r, j)]).collect();
        for (pred, exact) in &columns {
            row.extend([pred[r], exact[r], (pred[r] - exact[r]).abs()]);
        }
        writeln!(w, "{}", fmt_row(row))?;
    }
    w.flush()?;

    if let Some(plate) = &problem.plate {
        let fields = plate_postprocess(&out.solution, plate, pts.as_ref(), DerivativeMethod::Analytic)?;
        let exact: Vec<PlateFields<f64>> =
            (0..pts.nrows()).map(|r| plate.exact_fields(&[pts[(r, 0)], pts[(r, 1)]])).collect();
        let mut w = files.create("plate_fields.csv")?;
        let mut header = vec!["x1".to_string(), "x2".to_string()];
        for name in PlateFields::<f64>::NAMES {
            header.extend([format!("predicted_{name}"), format!("exact_{name}"), format!("abs_error_{name}")]);
        }
        writeln!(w, "{}", header.join(","))?;
        let computed = fields.as_array();
        for r in 0..pts.nrows() {
            let mut row = vec![pts[(r, 0)], pts[(r, 1)]];
            for (k, ex) in exact[r].as_array().into_iter().enumerate() {
                let p = computed[k][r];
                row.extend([p, *ex, (p - ex).abs()]);
            }
            writeln!(w, "{}", fmt_row(row))?;
        }
        w.flush()?;
        for (k, name) in PlateFields::<f64>::NAMES.iter().enumerate() {
            let reference: Vec<f64> = exact.iter().map(|e| *e.as_array()[k]).collect();
            let err = crate::assembly::l2_relative_error(computed[k], &reference)?;
            entry.fvals.insert((*name).to_string(), err);
        }
    }

    if let Some(trace) = &out.newton {
        let mut w = files.create("newton_trace.csv")?;
        trace.write_csv(&mut w)?;
        w.flush()?;
    }

    let mut rep = report(Command::Solve, config, started);
    rep.entries.push(entry);
    rep.wall_seconds = started.elapsed().as_secs_f64();
    files.finish(rep)
}

/// Runs every requested (activation, algorithm) pair over the search space
/// and writes one `trace_<activation>_<algorithm>.csv` per pair.
pub fn run_optimize(config: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let started = Instant::now();
    let problem = config.build_problem()?;
    let space = config.search_space()?;
    let base = config.hyperparams.clone().unwrap_or_else(|| default_hyperparams(config.problem));
    let mut swarm = config.optimizer.swarm;
    swarm.seed = config.seeds.outer;
    swarm.validate()?;
    if config.optimizer.algorithms.is_empty() {
        return Err(Error::Config("[optimizer] algorithms is empty".into()));
    }
    let mut files = Outputs::new(out_dir)?;
    let mut rep = report(Command::Optimize, config, started);

    for activation in config.activations() {
        let settings = config.solver.settings(activation, config.solver.derivative);
        for &algorithm in &config.optimizer.algorithms {
            let t = Instant::now();
            let mut evaluations = 0usize;
            let mut fitness = |x: &[f64]| {
                evaluations += 1;
                let mut hp = base.clone();
                hp.0.extend(space.decode(x).0);
                inner_fitness(&problem, &hp, &settings, config.seeds.inner)
            };
            let result = optimize(&space, &mut fitness, algorithm, &swarm)?;
            let mut w = files.create(&format!("trace_{activation}_{algorithm}.csv"))?;
            write_trace_csv(&result.trace, &space, &mut w)?;
            w.flush()?;

            let mut hp = base.clone();
            hp.0.extend(space.decode(&result.best_position).0);
            let mut entry =
                ReportEntry::new(format!("{activation}/{algorithm}"), activation, config.solver.derivative, hp);
            entry.algorithm = Some(algorithm);
            entry.fitness = result.best_fval;
            entry.evaluations = Some(evaluations);
            entry.seconds = t.elapsed().as_secs_f64();
            rep.entries.push(entry);
        }
    }
    rep.wall_seconds = started.elapsed().as_secs_f64();
    files.finish(rep)
}

/// Activation × ω × κ grid on the 1D sweep problem; writes `sweep.csv`.
pub fn run_sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let started = Instant::now();
    let ProblemId::Poisson1dSweep { kappa } = config.problem else {
        return Err(Error::Config(format!("`sweep` runs on poisson1d_sweep, not {}", config.problem)));
    };
    let sweep = config.sweep.as_ref().ok_or_else(|| Error::Config("`sweep` needs a [sweep] table".into()))?;
    let kappas = if sweep.kappas.is_empty() { vec![kappa] } else { sweep.kappas.clone() };
    let mut files = Outputs::new(out_dir)?;
    let mut rep = report(Command::Sweep, config, started);
    let mut w = files.create("sweep.csv")?;
    writeln!(w, "activation,kappa,omega,fval")?;

    for &activation in &sweep.activations {
        let settings = config.solver.settings(activation, config.solver.derivative);
        for &k in &kappas {
            let id = ProblemId::Poisson1dSweep { kappa: k };
            let problem = make_problem(id)?.with_eval_seed(config.seeds.eval);
            let mut hp = default_hyperparams(id);
            if let Some(fixed) = &config.hyperparams {
                hp.0.extend(fixed.0.clone());
            }
            for &omega in &sweep.omegas {
                hp.set("omega", omega);
                let t = Instant::now();
                let fval = inner_fitness(&problem, &hp, &settings, config.seeds.inner);
                writeln!(w, "{activation},{k:?},{omega:?},{fval:?}")?;
                let mut entry = ReportEntry::new(
                    format!("{activation}/kappa={k}/omega={omega}"),
                    activation,
                    config.solver.derivative,
                    hp.clone(),
                );
                entry.fvals.insert("u".into(), fval);
                entry.fitness = fval;
                entry.seconds = t.elapsed().as_secs_f64();
                rep.entries.push(entry);
            }
        }
    }
    w.flush()?;
    drop(w);
    rep.wall_seconds = started.elapsed().as_secs_f64();
    files.finish(rep)
}

/// Solves the configured problem once with derivative networks and once with
/// finite differences. `dbench.csv` holds the errors and is reproducible;
/// wall-clock times go to `dbench_timing.csv`.
pub fn run_derivative_bench(config: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let started = Instant::now();
    let hp = config.hyperparams.clone().unwrap_or_else(|| default_hyperparams(config.problem));
    let problem = config.build_problem()?;
    problem.validate(&hp)?;
    let names = problem.field_names();
    let mut files = Outputs::new(out_dir)?;
    let mut rep = report(Command::Dbench, config, started);

    let activation = config.solver.activation;
    let mut errors = files.create("dbench.csv")?;
    writeln!(errors, "method,fitness,{}", names.iter().map(|n| format!("fval_{n}")).collect::<Vec<_>>().join(","))?;
    let mut timing = files.create("dbench_timing.csv")?;
    writeln!(timing, "method,seconds")?;
    for kind in [DerivativeKind::Analytic, DerivativeKind::Fd] {
        let settings = config.solver.settings(activation, kind);
        let t = Instant::now();
        let out = solve_problem(&problem, &hp, &settings, config.seeds.inner)?;
        let seconds = t.elapsed().as_secs_f64();
        let label = match kind {
            DerivativeKind::Analytic => "analytic",
            DerivativeKind::Fd => "fd",
        };
        writeln!(errors, "{label},{:?},{}", out.fitness, fmt_row(out.field_errors.iter().copied()))?;
        writeln!(timing, "{label},{seconds:?}")?;
        rep.entries.push(outcome_entry(label, &problem, activation, kind, &hp, &out, seconds));
    }
    errors.flush()?;
    timing.flush()?;
    drop((errors, timing));
    let (a, f) = (rep.entries[0].fitness, rep.entries[1].fitness);
    rep.summary.insert("fd_over_analytic".into(), f / a);
    rep.wall_seconds = started.elapsed().as_secs_f64();
    files.finish(rep)
}
