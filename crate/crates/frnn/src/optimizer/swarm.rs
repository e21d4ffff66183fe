use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::space::HyperparamSpace;
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng_for};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MscPsoConfig {
    pub eta_max: f64,
    pub eta_min: f64,
    pub c1_max: f64,
    pub c1_min: f64,
    pub c2_max: f64,
    pub c2_min: f64,
    /// Attraction toward the elite mean.
    pub c3: f64,
    /// Share of the swarm forming the elite.
    pub elite_fraction: f64,
    /// Multiplier on the mutation standard deviation; zero disables mutation.
    pub mutation_scale: f64,
    pub t_max: usize,
    /// Swarm size.
    pub m: usize,
    pub seed: u64,
}

impl Default for MscPsoConfig {
    fn default() -> Self {
        MscPsoConfig {
            eta_max: 0.9,
            eta_min: 0.4,
            c1_max: 2.5,
            c1_min: 0.5,
            c2_max: 2.5,
            c2_min: 0.5,
            c3: 0.4,
            elite_fraction: 0.2,
            mutation_scale: 1.0,
            t_max: 50,
            m: 20,
            seed: 0,
        }
    }
}

impl MscPsoConfig {
    pub fn validate(&self) -> Result<()> {
        let bounds = [self.eta_max, self.eta_min, self.c1_max, self.c1_min, self.c2_max, self.c2_min];
        if bounds.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("schedule bounds must be positive"));
        }
        if !(self.c3 >= 0.0 && self.elite_fraction >= 0.0 && self.mutation_scale >= 0.0) {
            return Err(invalid("c3, elite_fraction and mutation_scale must be non-negative"));
        }
        if self.t_max == 0 || self.m == 0 {
            return Err(invalid("t_max and m must be at least 1"));
        }
        Ok(())
    }
}

/// `(η, c1, c2)` at iteration `t ∈ 1..=T_max`: η and c1 decrease linearly,
/// c2 increases linearly.
pub fn schedule_params(config: &MscPsoConfig, t: usize) -> Result<(f64, f64, f64)> {
    if t == 0 || t > config.t_max {
        return Err(invalid(format!("iteration {t} outside 1..={}", config.t_max)));
    }
    let s = t as f64 / config.t_max as f64;
    Ok((
        config.eta_max - s * (config.eta_max - config.eta_min),
        config.c1_max - s * (config.c1_max - config.c1_min),
        config.c2_min + s * (config.c2_max - config.c2_min),
    ))
}

/// Velocity update rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Scheduled coefficients, elite attraction and mutation.
    Msc,
    /// Constant coefficients, no elite term, no mutation.
    Vanilla { eta: f64, c1: f64, c2: f64 },
}

impl UpdateRule {
    pub const VANILLA: UpdateRule = UpdateRule::Vanilla { eta: 0.7, c1: 1.5, c2: 1.5 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    /// Fitness of the current position.
    pub fval: f64,
    pub best_position: Vec<f64>,
    pub best_fval: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub global_best: Vec<f64>,
    pub global_best_fval: f64,
    pub elite_mean: Vec<f64>,
    /// Completed iterations; zero right after initialisation.
    pub iteration: usize,
}

/// `max(1, ⌊fraction · M⌋)`.
pub fn elite_count(m: usize, fraction: f64) -> usize {
    ((fraction * m as f64).floor() as usize).clamp(1, m.max(1))
}

/// Mean position of the `elite_count` particles with the lowest current
/// fitness, ties broken by index.
pub fn elite_mean(particles: &[Particle], fraction: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..particles.len()).collect();
    order.sort_by(|&a, &b| particles[a].fval.total_cmp(&particles[b].fval).then(a.cmp(&b)));
    let k = elite_count(particles.len(), fraction);
    let dim = particles[0].position.len();
    let mut mean = vec![0.0; dim];
    for &i in &order[..k] {
        for (m, x) in mean.iter_mut().zip(&particles[i].position) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= k as f64);
    mean
}

fn sanitize(f: f64) -> f64 {
    if f.is_finite() {
        f
    } else {
        f64::INFINITY
    }
}

/// Random positions and velocities, one evaluation per particle.
pub fn init_swarm(
    space: &HyperparamSpace,
    config: &MscPsoConfig,
    fitness: &mut dyn FnMut(&[f64]) -> f64,
) -> Result<SwarmState> {
    config.validate()?;
    let dim = space.len();
    let mut particles = Vec::with_capacity(config.m);
    for i in 0..config.m {
        let mut rng = rng_for(derive_seed(derive_seed(config.seed, 0), i as u64));
        let position: Vec<f64> = space.dims().iter().map(|d| rng.random_range(d.lower..=d.upper)).collect();
        let velocity: Vec<f64> = (0..dim).map(|j| rng.random_range(-space.v_max(j)..=space.v_max(j))).collect();
        let fval = sanitize(fitness(&position));
        particles.push(Particle { best_position: position.clone(), best_fval: fval, position, velocity, fval });
    }
    let mut swarm = SwarmState {
        elite_mean: elite_mean(&particles, config.elite_fraction),
        global_best: Vec::new(),
        global_best_fval: f64::INFINITY,
        particles,
        iteration: 0,
    };
    update_global_best(&mut swarm);
    Ok(swarm)
}

fn update_global_best(swarm: &mut SwarmState) {
    for p in &swarm.particles {
        if swarm.global_best.is_empty() || p.best_fval < swarm.global_best_fval {
            swarm.global_best_fval = p.best_fval;
            swarm.global_best = p.best_position.clone();
        }
    }
}

/// One iteration. Random factors `r1, r2, r3` are drawn per dimension from a
/// substream keyed by `(seed, t, particle)`, followed by the mutation noise.
pub fn pso_iterate(
    swarm: &mut SwarmState,
    space: &HyperparamSpace,
    config: &MscPsoConfig,
    rule: UpdateRule,
    fitness: &mut dyn FnMut(&[f64]) -> f64,
) -> Result<()> {
    let t = swarm.iteration + 1;
    let (eta, c1, c2, c3) = match rule {
        UpdateRule::Msc => {
            let (eta, c1, c2) = schedule_params(config, t)?;
            (eta, c1, c2, config.c3)
        }
        UpdateRule::Vanilla { eta, c1, c2 } => (eta, c1, c2, 0.0),
    };
    let decay = (-(t as f64) / config.t_max as f64).exp();
    let dim = space.len();
    for (i, p) in swarm.particles.iter_mut().enumerate() {
        let mut rng = rng_for(derive_seed(derive_seed(config.seed, t as u64), i as u64));
        let r1: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let r2: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let msc = rule == UpdateRule::Msc;
        let r3: Vec<f64> = if msc { (0..dim).map(|_| rng.random::<f64>()).collect() } else { vec![0.0; dim] };
        for j in 0..dim {
            let x = p.position[j];
            let mut v =
                eta * p.velocity[j] + c1 * r1[j] * (p.best_position[j] - x) + c2 * r2[j] * (swarm.global_best[j] - x);
            if msc {
                v += c3 * r3[j] * (swarm.elite_mean[j] - x);
            }
            let vmax = space.v_max(j);
            p.velocity[j] = v.clamp(-vmax, vmax);
        }
        for j in 0..dim {
            let mut x = p.position[j] + p.velocity[j];
            if msc {
                let z: f64 = rng.sample(StandardNormal);
                x += config.mutation_scale * space.sigma_max(j) * decay * z;
            }
            p.position[j] = space.clamp(j, x);
        }
        p.fval = sanitize(fitness(&p.position));
        if p.fval < p.best_fval {
            p.best_fval = p.fval;
            p.best_position = p.position.clone();
        }
    }
    swarm.iteration = t;
    swarm.elite_mean = elite_mean(&swarm.particles, config.elite_fraction);
    update_global_best(swarm);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    MscPso,
    Pso,
    RandomSearch,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::MscPso, Algorithm::Pso, Algorithm::RandomSearch];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MscPso => "msc_pso",
            Algorithm::Pso => "pso",
            Algorithm::RandomSearch => "random_search",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| invalid(format!("unknown algorithm `{s}`")))
    }
}

/// Convergence record after one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    pub best_fval: f64,
    /// Mean over the generation's finite fitness values (NaN if none).
    pub mean_fval: f64,
    pub best_position: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best_position: Vec<f64>,
    pub best_fval: f64,
    /// One row per generation `1..=T_max`.
    pub trace: Vec<TraceRow>,
}

fn finite_mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values.filter(|v| v.is_finite()) {
        sum += v;
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Minimises `fitness` over `space`. Swarm methods evaluate an initial
/// population and then `T_max` generations of `M` particles; random search
/// draws `M · T_max` uniform points in generations of `M`.
pub fn optimize(
    space: &HyperparamSpace,
    fitness: &mut dyn FnMut(&[f64]) -> f64,
    algorithm: Algorithm,
    config: &MscPsoConfig,
) -> Result<OptimizeResult> {
    config.validate()?;
    let mut trace = Vec::with_capacity(config.t_max);
    match algorithm {
        Algorithm::MscPso | Algorithm::Pso => {
            let rule = if algorithm == Algorithm::MscPso { UpdateRule::Msc } else { UpdateRule::VANILLA };
            let mut swarm = init_swarm(space, config, fitness)?;
            for _ in 0..config.t_max {
                pso_iterate(&mut swarm, space, config, rule, fitness)?;
                trace.push(TraceRow {
                    generation: swarm.iteration,
                    best_fval: swarm.global_best_fval,
                    mean_fval: finite_mean(swarm.particles.iter().map(|p| p.fval)),
                    best_position: swarm.global_best.clone(),
                });
            }
            Ok(OptimizeResult { best_position: swarm.global_best, best_fval: swarm.global_best_fval, trace })
        }
        Algorithm::RandomSearch => {
            let (mut best, mut best_f) = (Vec::new(), f64::INFINITY);
            for t in 1..=config.t_max {
                let mut fvals = Vec::with_capacity(config.m);
                for i in 0..config.m {
                    let mut rng = rng_for(derive_seed(derive_seed(config.seed, t as u64), i as u64));
                    let x: Vec<f64> = space.dims().iter().map(|d| rng.random_range(d.lower..=d.upper)).collect();
                    let f = sanitize(fitness(&x));
                    if best.is_empty() || f < best_f {
                        best_f = f;
                        best = x;
                    }
                    fvals.push(f);
                }
                trace.push(TraceRow {
                    generation: t,
                    best_fval: best_f,
                    mean_fval: finite_mean(fvals.into_iter()),
                    best_position: best.clone(),
                });
            }
            Ok(OptimizeResult { best_position: best, best_fval: best_f, trace })
        }
    }
}

/// CSV with header `generation,best_fval,mean_fval,<dimension names...>`;
/// positions are decoded (integer dimensions rounded).
pub fn write_trace_csv(trace: &[TraceRow], space: &HyperparamSpace, mut out: impl Write) -> Result<()> {
    let names: Vec<&str> = space.dims().iter().map(|d| d.name.as_str()).collect();
    writeln!(out, "generation,best_fval,mean_fval,{}", names.join(","))?;
    for row in trace {
        let pos: Vec<String> = space.snap(&row.best_position).iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{},{:?},{:?},{}", row.generation, row.best_fval, row.mean_fval, pos.join(","))?;
    }
    Ok(())
}
