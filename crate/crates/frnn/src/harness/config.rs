use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::DerivativeMethod;
use crate::error::{Error, Result};
use crate::feature_net::{ActivationKind, FdSteps};
use crate::nonlinear::NewtonConfig;
use crate::optimizer::{Algorithm, HyperparamSpace, MscPsoConfig, SpaceDim};
use crate::problems::{make_problem, default_ranges, Hyperparams, PdeProblem, ProblemId, SolverSettings, EVAL_SEED};

/// Complete description of one experiment, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    #[serde(default)]
    pub solver: SolverSection,
    /// Fixed hyperparameters. `solve` needs all of them; `optimize` uses them
    /// for dimensions outside the search space.
    #[serde(default)]
    pub hyperparams: Option<Hyperparams>,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    /// Search space; defaults to the problem's benchmark ranges.
    #[serde(default)]
    pub space: Option<Vec<SpaceDim>>,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeKind {
    #[default]
    Analytic,
    Fd,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub activation: ActivationKind,
    pub derivative: DerivativeKind,
    /// Finite-difference steps when `derivative = "fd"`.
    pub fd_steps: Option<FdSteps>,
    pub newton: NewtonConfig,
}

impl SolverSection {
    pub fn method(&self, kind: DerivativeKind) -> DerivativeMethod {
        match kind {
            DerivativeKind::Analytic => DerivativeMethod::Analytic,
            DerivativeKind::Fd => DerivativeMethod::Fd(self.fd_steps.unwrap_or_default()),
        }
    }

    pub fn settings(&self, activation: ActivationKind, kind: DerivativeKind) -> SolverSettings {
        SolverSettings { activation, method: self.method(kind), newton: self.newton }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub algorithms: Vec<Algorithm>,
    /// Activations to optimise with; empty means the solver activation.
    pub activations: Vec<ActivationKind>,
    #[serde(flatten)]
    pub swarm: MscPsoConfig,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        OptimizerSection {
            algorithms: vec![Algorithm::MscPso],
            activations: Vec::new(),
            swarm: MscPsoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    /// Swarm randomness.
    pub outer: u64,
    /// Networks and collocation points.
    pub inner: u64,
    /// Random evaluation sets.
    pub eval: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { outer: 0, inner: 0, eval: EVAL_SEED }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Values of κ; defaults to the problem's own κ.
    #[serde(default)]
    pub kappas: Vec<f64>,
    pub omegas: Vec<f64>,
    pub activations: Vec<ActivationKind>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Configuration with defaults everywhere except the problem.
    pub fn new(problem: ProblemId) -> Self {
        ExperimentConfig {
            problem,
            solver: SolverSection::default(),
            hyperparams: None,
            optimizer: OptimizerSection::default(),
            space: None,
            seeds: Seeds::default(),
            sweep: None,
            output: OutputSection::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.check_problem_keys(text)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    // Tagged unit variants accept any extra key, so compare against what the
    // parsed id serializes back to.
    fn check_problem_keys(&self, text: &str) -> Result<()> {
        let raw: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let known = toml::Table::try_from(self.problem).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(toml::Value::Table(given)) = raw.get("problem") {
            if let Some(key) = given.keys().find(|k| !known.contains_key(*k)) {
                return Err(Error::Config(format!("unknown key `{key}` in [problem] for {}", self.problem)));
            }
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build_problem(&self) -> Result<PdeProblem> {
        Ok(make_problem(self.problem)?.with_eval_seed(self.seeds.eval))
    }

    pub fn search_space(&self) -> Result<HyperparamSpace> {
        match &self.space {
            Some(dims) => HyperparamSpace::new(dims.clone()),
            None => HyperparamSpace::from_ranges(&default_ranges(self.problem)),
        }
    }

    pub fn activations(&self) -> Vec<ActivationKind> {
        if self.optimizer.activations.is_empty() {
            vec![self.solver.activation]
        } else {
            self.optimizer.activations.clone()
        }
    }
}
