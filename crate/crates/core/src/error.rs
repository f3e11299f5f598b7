use thiserror::Error;

/// Errors produced by model construction, integration, calibration and solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid group partition: {0}")]
    InvalidPartition(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },

    #[error("budget {budget} exceeds full-intensity spend {full_spend}")]
    InfeasibleBudget { budget: f64, full_spend: f64 },

    #[error("bisection failed to bracket the target: {0}")]
    Bisection(String),

    #[error("invalid simulation setting: {0}")]
    InvalidSimulation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
