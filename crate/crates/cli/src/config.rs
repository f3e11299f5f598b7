//! Scenario configuration: a single TOML file with nested sections whose
//! defaults reproduce the baseline experiment, so an empty file is a valid
//! scenario.

use anyhow::{bail, Context};
use serde::Deserialize;
use std::path::Path;

use campaign_core::degree::{DegreeDistribution, GroupPartition};
use campaign_core::dynamics::{MeanFieldSystem, ModelParams, SpreadingProfile, TimeGrid};
use campaign_core::solver::SolverOptions;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub network: NetworkConfig,
    pub model: ModelConfig,
    pub solver: SolverConfig,
    pub sweep: Option<SweepConfig>,
    pub validation: ValidationConfig,
    pub output: OutputConfig,
    /// Seed for simulation RNG streams.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            network: NetworkConfig::default(),
            model: ModelConfig::default(),
            solver: SolverConfig::default(),
            sweep: None,
            validation: ValidationConfig::default(),
            output: OutputConfig::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    /// "poisson" (Erdős–Rényi) or "power_law".
    pub kind: String,
    pub lambda: f64,
    pub gamma: f64,
    pub k_min: usize,
    pub k_max: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            kind: "poisson".into(),
            lambda: 23.60,
            gamma: 2.0,
            k_min: 1,
            k_max: 60,
        }
    }
}

/// A per-group weight given either as one scalar for all groups or as an
/// explicit per-group list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GroupWeights {
    Scalar(f64),
    PerGroup(Vec<f64>),
}

impl GroupWeights {
    pub fn expand(&self, groups: usize) -> anyhow::Result<Vec<f64>> {
        match self {
            GroupWeights::Scalar(w) => Ok(vec![*w; groups]),
            GroupWeights::PerGroup(ws) => {
                if ws.len() != groups {
                    bail!("expected {groups} per-group weights, got {}", ws.len());
                }
                Ok(ws.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Number of control groups M.
    pub groups: usize,
    /// Grid points N + 1 on [0, T].
    pub time_points: usize,
    /// "constant", "decreasing" or "increasing".
    pub beta_profile: String,
    pub beta: f64,
    /// Peak rate for the linear profiles.
    pub beta_max: f64,
    pub alpha: f64,
    pub i0: f64,
    pub horizon: f64,
    pub u_max: f64,
    pub v_max: f64,
    pub b_hat: GroupWeights,
    pub c_hat: GroupWeights,
    /// Relative word-of-mouth cost d.
    pub wom_cost_weight: f64,
    /// Per-node budget; omitted means u_max²·T/8.
    pub budget: Option<f64>,
    /// "optimal", "static", "bang_bang" or "none".
    pub strategy: String,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            groups: 3,
            time_points: 51,
            beta_profile: "constant".into(),
            beta: 0.12,
            beta_max: 0.24,
            alpha: 0.5,
            i0: 0.01,
            horizon: 1.0,
            u_max: 0.12,
            v_max: 0.5,
            b_hat: GroupWeights::Scalar(1.0),
            c_hat: GroupWeights::Scalar(1.0),
            wom_cost_weight: 0.5,
            budget: None,
            strategy: "optimal".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol_grad: f64,
    pub tol_con: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let defaults = SolverOptions::default();
        Self {
            tol_grad: defaults.tol_grad,
            tol_con: defaults.tol_con,
            max_outer: defaults.max_outer,
            max_inner: defaults.max_inner,
            n_starts: defaults.n_starts,
            seed: 42,
        }
    }
}

impl SolverConfig {
    pub fn to_options(&self) -> SolverOptions {
        SolverOptions {
            tol_grad: self.tol_grad,
            tol_con: self.tol_con,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            n_starts: self.n_starts,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// One of "B", "d", "beta", "b_hat_2", "i0".
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    pub n_nodes: usize,
    pub n_runs: usize,
    /// Simulation step; omitted means the control grid spacing.
    pub dt: Option<f64>,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            n_nodes: 10_000,
            n_runs: 20,
            dt: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    /// Worker cap for parallel sections; 0 keeps the default pool size.
    pub workers: usize,
    /// Degrees whose per-class trajectories go into trajectory.csv;
    /// empty selects k_min, each group's rounded mean degree, and k_max.
    pub trajectory_degrees: Vec<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            workers: 0,
            trajectory_degrees: Vec::new(),
        }
    }
}

/// Everything a run needs, resolved from a parsed configuration.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub sys: MeanFieldSystem,
    pub params: ModelParams,
    pub grid: TimeGrid,
}

pub fn load(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let config: ScenarioConfig =
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    Ok(config)
}

pub fn build_distribution(network: &NetworkConfig) -> anyhow::Result<DegreeDistribution> {
    let dist = match network.kind.as_str() {
        "poisson" => {
            DegreeDistribution::truncated_poisson(network.lambda, network.k_min, network.k_max)?
        }
        "power_law" => {
            DegreeDistribution::power_law(network.gamma, network.k_min, network.k_max)?
        }
        other => bail!("unknown network kind {other:?} (expected \"poisson\" or \"power_law\")"),
    };
    Ok(dist)
}

pub fn resolve(config: ScenarioConfig) -> anyhow::Result<Scenario> {
    let model = &config.model;
    if model.time_points < 2 {
        bail!("model.time_points must be at least 2");
    }
    match model.strategy.as_str() {
        "optimal" | "static" | "bang_bang" | "none" => {}
        other => bail!("unknown strategy {other:?}"),
    }
    if let Some(sweep) = &config.sweep {
        match sweep.parameter.as_str() {
            "B" | "d" | "beta" | "i0" => {}
            "b_hat_2" => {
                if model.groups < 2 {
                    bail!("sweeping b_hat_2 requires at least 2 groups");
                }
            }
            other => bail!(
                "unknown sweep parameter {other:?} (expected B, d, beta, b_hat_2 or i0)"
            ),
        }
        if sweep.values.is_empty() {
            bail!("sweep.values must not be empty");
        }
    }

    let dist = build_distribution(&config.network)?;
    let partition = GroupPartition::equal_mass(&dist, model.groups)?;
    let sys = MeanFieldSystem::new(dist, partition)?;

    let profile = match model.beta_profile.as_str() {
        "constant" => SpreadingProfile::Constant { rate: model.beta },
        "decreasing" => SpreadingProfile::LinearDecreasing {
            peak: model.beta_max,
        },
        "increasing" => SpreadingProfile::LinearIncreasing {
            peak: model.beta_max,
        },
        other => bail!("unknown beta profile {other:?}"),
    };
    let params = ModelParams {
        profile,
        alpha: model.alpha,
        i0: model.i0,
        horizon: model.horizon,
        u_max: model.u_max,
        v_max: model.v_max,
        b_hat: model.b_hat.expand(model.groups)?,
        c_hat: model.c_hat.expand(model.groups)?,
        wom_cost_weight: model.wom_cost_weight,
        budget: model
            .budget
            .unwrap_or(model.u_max * model.u_max * model.horizon / 8.0),
    };
    params.validate(model.groups)?;
    let grid = TimeGrid::new(model.horizon, model.time_points - 1)?;

    Ok(Scenario {
        config,
        sys,
        params,
        grid,
    })
}
