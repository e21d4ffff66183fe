//! Particle swarm search over solver hyperparameters: MSC-PSO (scheduled
//! coefficients, elite attraction, decaying mutation), a vanilla PSO baseline
//! and uniform random search.

mod space;
mod swarm;

pub use space::{decode_position, HyperparamSpace, SpaceDim, MUTATION_FRACTION, VELOCITY_FRACTION};
pub use swarm::{
    elite_count, elite_mean, init_swarm, optimize, pso_iterate, schedule_params, write_trace_csv, Algorithm,
    MscPsoConfig, OptimizeResult, Particle, SwarmState, TraceRow, UpdateRule,
};

#[cfg(test)]
mod tests;
