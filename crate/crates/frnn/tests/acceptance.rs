//! End-to-end gate: every criterion runs at its pinned threshold and prints
//! one `[PASS]`/`[FAIL]` line. The test fails if any criterion fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use faer::Mat;
use frnn::feature_net::{ActivationKind, FeatureNetwork, MultiIndex};
use frnn::harness::{Command, ExperimentConfig, RunReport};
use frnn::optimizer::{
    init_swarm, optimize, pso_iterate, write_trace_csv, Algorithm, HyperparamSpace, MscPsoConfig, UpdateRule,
};
use frnn::rng::rng_for;
use rand::Rng;

struct Gate {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Gates {
    gates: Vec<Gate>,
    reproducible: Vec<(String, bool)>,
}

impl Gates {
    fn record(&mut self, id: usize, name: &'static str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {detail}");
        self.gates.push(Gate { id, name, pass, detail });
    }

    /// Runs `command` twice into fresh directories and notes whether every
    /// CSV came out byte-identical.
    fn run(&mut self, label: &str, command: Command, config: &ExperimentConfig) -> (RunReport, f64) {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let t = Instant::now();
        let report = command.run(config, a.path()).unwrap_or_else(|e| panic!("{label}: {e}"));
        let seconds = t.elapsed().as_secs_f64();
        command.run(config, b.path()).unwrap_or_else(|e| panic!("{label} (repeat): {e}"));
        self.reproducible.push((label.to_string(), same_csvs(a.path(), b.path())));
        (report, seconds)
    }
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .filter(|p| !p.file_name().unwrap().to_string_lossy().contains("timing"))
        .collect();
    files.sort();
    files
}

fn same_csvs(a: &Path, b: &Path) -> bool {
    let (fa, fb) = (csv_files(a), csv_files(b));
    !fa.is_empty()
        && fa.len() == fb.len()
        && fa
            .iter()
            .zip(&fb)
            .all(|(x, y)| x.file_name() == y.file_name() && std::fs::read(x).unwrap() == std::fs::read(y).unwrap())
}

fn preset(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(name);
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

// ---------------------------------------------------------------------------
// 1. derivative networks against finite differences

/// Largest `|w · h|` of the finite-difference oracle on any axis.
const FD_REACH: f64 = 0.2;

/// Central-difference weights for derivative order 0..=4, offsets `-2..=2`.
const CENTRAL: [[f64; 5]; 5] = [
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, -0.5, 0.0, 0.5, 0.0],
    [0.0, 1.0, -2.0, 1.0, 0.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
    [1.0, -4.0, 6.0, -4.0, 1.0],
];

/// Tensor-product central difference of `net`'s features at `x`, step `h[j]` on axis `j`.
fn fd_mixed(net: &FeatureNetwork, m: &MultiIndex, x: &[f64], h: &[f64]) -> Vec<f64> {
    let dim = x.len();
    let mut offsets: Vec<(Vec<f64>, f64)> = vec![(x.to_vec(), 1.0)];
    for (axis, &order) in m.orders().iter().enumerate() {
        let mut next = Vec::new();
        for (p, w) in &offsets {
            for (k, &c) in CENTRAL[order].iter().enumerate() {
                if c != 0.0 {
                    let mut q = p.clone();
                    q[axis] += (k as f64 - 2.0) * h[axis];
                    next.push((q, w * c));
                }
            }
        }
        offsets = next;
    }
    let pts = Mat::from_fn(offsets.len(), dim, |r, j| offsets[r].0[j]);
    let vals = net.eval_features(pts.as_ref()).unwrap();
    let scale: f64 = m.orders().iter().zip(h).map(|(&o, s)| s.powi(o as i32)).product();
    (0..net.width())
        .map(|i| offsets.iter().enumerate().map(|(r, (_, w))| w * vals[(r, i)]).sum::<f64>() / scale)
        .collect()
}

/// Richardson extrapolation over `h, h/2, h/4, h/8`, cancelling the
/// `h²`, `h⁴` and `h⁶` error terms of the central stencils.
fn fd_richardson(net: &FeatureNetwork, m: &MultiIndex, x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut table: Vec<Vec<f64>> = (0..4)
        .map(|k| {
            let hk: Vec<f64> = h.iter().map(|s| s / f64::powi(2.0, k)).collect();
            fd_mixed(net, m, x, &hk)
        })
        .collect();
    for level in 1..4 {
        let factor = f64::powi(4.0, level);
        table = table
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (factor * b - a) / (factor - 1.0)).collect())
            .collect();
    }
    table.pop().unwrap()
}

fn criterion_derivative_oracle(gates: &mut Gates) {
    let t = Instant::now();
    let mut rng = rng_for(2024);
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    for n in 0..200 {
        let activation = ActivationKind::ALL[n % 4];
        let dim = 1 + (n / 4) % 3;
        let width = rng.random_range(1..=50);
        let omega = rng.random_range(0.5..2.0);
        let net = FeatureNetwork::init(dim, width, omega, activation, rng.random()).unwrap();
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let point = Mat::from_fn(1, dim, |_, j| x[j]);
        // Steps keep |w · h| at or below `FD_REACH` on every axis.
        let steps: Vec<f64> =
            (0..dim).map(|j| FD_REACH / (0..width).map(|i| net.weight(i, j).abs()).fold(1e-3, f64::max)).collect();
        for m in MultiIndex::all_up_to(dim, 4) {
            let exact = net.eval_derivative_features(&m, point.as_ref()).unwrap();
            let approx = fd_richardson(&net, &m, &x, &steps);
            let scale = (0..width).map(|i| exact[(0, i)].abs()).fold(1e-2, f64::max);
            let err = (0..width).map(|i| (exact[(0, i)] - approx[i]).abs()).fold(0.0, f64::max);
            worst = worst.max(err / scale);
            checks += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    gates.record(
        1,
        "derivative networks vs Richardson central differences",
        worst <= 1e-6 && secs <= 60.0,
        format!("worst relative error {} <= 1e-6 over {checks} checks ({secs:.1}s <= 60s)", sci(worst)),
    );
}

// ---------------------------------------------------------------------------
// 2-7. benchmark solves with the tuned hyperparameters

fn solve_preset(gates: &mut Gates, name: &str) -> (RunReport, f64) {
    gates.run(name, Command::Solve, &preset(name))
}

fn fval(report: &RunReport, field: &str) -> f64 {
    report.entries[0].fvals[field]
}

fn criterion_koch(gates: &mut Gates) {
    let (rep, secs) = solve_preset(gates, "koch.toml");
    let e = fval(&rep, "u");
    gates.record(
        2,
        "Koch snowflake Poisson",
        e <= 1e-8 && secs <= 300.0,
        format!("error {} <= 1e-8 ({secs:.1}s <= 300s)", sci(e)),
    );
}

fn criterion_wave(gates: &mut Gates) {
    let (rep, secs) = solve_preset(gates, "wave.toml");
    let e = fval(&rep, "u");
    gates.record(
        3,
        "wave equation",
        e <= 1e-6 && secs <= 300.0,
        format!("error {} <= 1e-6 ({secs:.1}s <= 300s)", sci(e)),
    );
}

fn criterion_plate(gates: &mut Gates) {
    let (rep, secs) = solve_preset(gates, "plate.toml");
    let w = fval(&rep, "u");
    let fields = ["M_x1", "M_x2", "M_x1x2", "Q_x1", "Q_x2"];
    let worst = fields.iter().map(|f| fval(&rep, f)).fold(0.0, f64::max);
    gates.record(
        4,
        "Kirchhoff plate",
        w <= 1e-10 && worst <= 1e-8 && secs <= 120.0,
        format!(
            "deflection error {} <= 1e-10, worst moment/shear error {} <= 1e-8 ({secs:.1}s <= 120s)",
            sci(w),
            sci(worst)
        ),
    );
}

fn criterion_highdim(gates: &mut Gates) {
    let (d5, _) = solve_preset(gates, "highdim_d5.toml");
    let config = preset("highdim_d10_reduced.toml");
    let hp = config.hyperparams.as_ref().unwrap();
    let width = hp.count("N").unwrap();
    let points = hp.count("N1").unwrap() + hp.count("N2").unwrap();
    let (d10, _) = gates.run("highdim_d10_reduced.toml", Command::Solve, &config);
    let (e5, e10) = (fval(&d5, "u"), fval(&d10, "u"));
    gates.record(
        5,
        "high-dimensional Poisson",
        e5 <= 1e-6 && e10 <= 1e-3 && width <= 2000 && points <= 8000,
        format!("d=5 error {} <= 1e-6; d=10 (N={width}, {points} points) error {} <= 1e-3", sci(e5), sci(e10)),
    );
}

fn criterion_lame(gates: &mut Gates) {
    let (rep, secs) = solve_preset(gates, "lame.toml");
    let (u, v) = (fval(&rep, "u"), fval(&rep, "v"));
    gates.record(
        6,
        "Lame thick-walled cylinder",
        u <= 1e-6 && v <= 1e-6 && secs <= 300.0,
        format!("errors u {} v {} <= 1e-6 ({secs:.1}s <= 300s)", sci(u), sci(v)),
    );
}

fn criterion_helmholtz(gates: &mut Gates) {
    let (rep, secs) = solve_preset(gates, "helmholtz.toml");
    let e = fval(&rep, "u");
    let iters = rep.entries[0].newton_iterations.unwrap();
    gates.record(
        7,
        "nonlinear Helmholtz with Newton iteration",
        e <= 1e-4 && iters <= 10 && secs <= 600.0,
        format!("error {} <= 1e-4 after {iters} <= 10 iterations ({secs:.1}s <= 600s)", sci(e)),
    );
}

// ---------------------------------------------------------------------------
// 8. activation sweep

fn criterion_sweep(gates: &mut Gates) {
    let (rep, _) = gates.run("sweep.toml", Command::Sweep, &preset("sweep.toml"));
    let cell = |act: &str, omega: &str| rep.entry(&format!("{act}/kappa=30/omega={omega}")).unwrap().fitness;
    let sine = cell("sine", "80");
    let mut others = f64::INFINITY;
    for act in ["sigmoid", "swish", "tanh"] {
        for omega in ["1", "20", "40", "80"] {
            others = others.min(cell(act, omega));
        }
    }
    gates.record(
        8,
        "activation gap on the 1D sweep (kappa=30)",
        sine <= 1e-6 && others >= 1e-2,
        format!("sine omega=80 error {} <= 1e-6; best non-sine {} >= 1e-2", sci(sine), sci(others)),
    );
}

// ---------------------------------------------------------------------------
// 9. analytic vs finite-difference derivatives

fn criterion_fd_gap(gates: &mut Gates) {
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["koch.toml", "plate.toml"] {
        let (rep, _) = gates.run(&format!("dbench {name}"), Command::Dbench, &preset(name));
        let (a, f) = (rep.entry("analytic").unwrap().fitness, rep.entry("fd").unwrap().fitness);
        let ratio = f / a;
        pass &= ratio >= 1e3;
        parts.push(format!("{name} analytic {} fd {} ratio {} >= 1e3", sci(a), sci(f), sci(ratio)));
    }
    gates.record(9, "analytic vs finite-difference gap", pass, parts.join("; "));
}

// ---------------------------------------------------------------------------
// 10. optimizer properties

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn criterion_optimizer(gates: &mut Gates) {
    let mut notes = Vec::new();

    // Bounds and velocity clamp over 100 iterations on a skewed 12-dim box.
    let space = HyperparamSpace::from_ranges(&[
        ("a", -1.0, 1.0, false),
        ("b", 0.0, 10.0, false),
        ("c", 10.0, 3000.0, true),
        ("d", 1e-4, 1e4, false),
        ("e", -50.0, -10.0, false),
        ("f", 0.0, 1e-3, false),
        ("g", 1.0, 2.0, false),
        ("h", -3.0, 7.0, false),
        ("i", 10.0, 20.0, true),
        ("j", 0.0, 100.0, false),
        ("k", -1e3, 1e3, false),
        ("l", 5.0, 6.0, false),
    ])
    .unwrap();
    let target: Vec<f64> = space.dims().iter().map(|d| d.lower + 0.3 * (d.upper - d.lower)).collect();
    let mut f = |x: &[f64]| {
        x.iter().zip(&target).enumerate().map(|(j, (a, b))| ((a - b) / space.range(j)).powi(2)).sum::<f64>()
    };
    let mut bounded = true;
    let mut monotone = true;
    for rule in [UpdateRule::Msc, UpdateRule::VANILLA] {
        let config = MscPsoConfig { m: 20, t_max: 100, seed: 5, ..Default::default() };
        let mut swarm = init_swarm(&space, &config, &mut f).unwrap();
        let mut last = swarm.global_best_fval;
        for _ in 0..100 {
            pso_iterate(&mut swarm, &space, &config, rule, &mut f).unwrap();
            for p in &swarm.particles {
                for (j, d) in space.dims().iter().enumerate() {
                    bounded &= p.position[j] >= d.lower && p.position[j] <= d.upper;
                    bounded &= p.velocity[j].abs() <= space.v_max(j);
                }
            }
            monotone &= swarm.global_best_fval <= last;
            last = swarm.global_best_fval;
        }
    }
    notes.push(format!("bounded {bounded}"));
    notes.push(format!("monotone {monotone}"));

    // Strategies off: one MSC step equals one vanilla step.
    let base = MscPsoConfig { m: 8, t_max: 10, seed: 11, ..Default::default() };
    let reduced = MscPsoConfig {
        eta_max: 0.7,
        eta_min: 0.7,
        c1_max: 1.5,
        c1_min: 1.5,
        c2_max: 1.5,
        c2_min: 1.5,
        c3: 0.0,
        elite_fraction: 0.0,
        mutation_scale: 0.0,
        ..base
    };
    let start = init_swarm(&space, &base, &mut f).unwrap();
    let (mut a, mut b) = (start.clone(), start);
    pso_iterate(&mut a, &space, &reduced, UpdateRule::Msc, &mut f).unwrap();
    pso_iterate(&mut b, &space, &reduced, UpdateRule::VANILLA, &mut f).unwrap();
    let reduces = a == b;
    notes.push(format!("reduces to vanilla {reduces}"));

    // Sphere benchmark.
    let cube = HyperparamSpace::cube(10, -5.12, 5.12).unwrap();
    let config = MscPsoConfig { m: 30, t_max: 100, seed: 0, ..Default::default() };
    let run = || optimize(&cube, &mut |x| sphere(x), Algorithm::MscPso, &config).unwrap();
    let (first, second) = (run(), run());
    let csv = |r: &frnn::optimizer::OptimizeResult| {
        let mut buf = Vec::new();
        write_trace_csv(&r.trace, &cube, &mut buf).unwrap();
        buf
    };
    gates.reproducible.push(("sphere trace".into(), csv(&first) == csv(&second)));
    let best = first.best_fval;
    notes.push(format!("10-dim sphere best {} <= 1e-2", sci(best)));

    gates.record(10, "optimizer properties", bounded && monotone && reduces && best <= 1e-2, notes.join(", "));
}

// ---------------------------------------------------------------------------
// 11. bi-level smoke run

fn criterion_smoke(gates: &mut Gates) {
    let config = preset("optimize_smoke.toml");
    let (rep, secs) = gates.run("optimize_smoke.toml", Command::Optimize, &config);
    let e = &rep.entries[0];
    let ok = e.algorithm == Some(Algorithm::MscPso)
        && config.optimizer.swarm.m == 10
        && config.optimizer.swarm.t_max == 20
        && e.fitness <= 1e-8
        && secs <= 600.0;
    gates.record(
        11,
        "bi-level MSC-PSO smoke run (M=10, T=20, kappa=10)",
        ok,
        format!("best fitness {} <= 1e-8 ({secs:.1}s <= 600s)", sci(e.fitness)),
    );
}

// ---------------------------------------------------------------------------

#[test]
fn acceptance_criteria() {
    let mut gates = Gates::default();
    criterion_derivative_oracle(&mut gates);
    criterion_koch(&mut gates);
    criterion_wave(&mut gates);
    criterion_plate(&mut gates);
    criterion_highdim(&mut gates);
    criterion_lame(&mut gates);
    criterion_helmholtz(&mut gates);
    criterion_sweep(&mut gates);
    criterion_fd_gap(&mut gates);
    criterion_optimizer(&mut gates);
    criterion_smoke(&mut gates);

    let differing: Vec<&str> = gates.reproducible.iter().filter(|(_, same)| !same).map(|(l, _)| l.as_str()).collect();
    let runs = gates.reproducible.len();
    gates.record(
        12,
        "repeated runs reproduce identical CSV output",
        differing.is_empty(),
        if differing.is_empty() {
            format!("{runs} runs identical")
        } else {
            format!("differs: {}", differing.join(", "))
        },
    );

    let failed: Vec<String> =
        gates.gates.iter().filter(|g| !g.pass).map(|g| format!("{} {} ({})", g.id, g.name, g.detail)).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
