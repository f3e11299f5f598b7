//! Optimal campaign control of Susceptible-Infected information epidemics on
//! degree-heterogeneous networks.
//!
//! The crate models information spreading with a degree-based compartmental
//! SI system driven by two per-group controls (direct recruitment and
//! word-of-mouth incentives), transcribes the fixed-budget control problem
//! into a finite NLP over sampled control values, and solves it with an
//! augmented-Lagrangian / projected-gradient method. A configuration-model
//! Monte Carlo simulator validates the mean-field dynamics.
//!
//! Modules map onto the pipeline:
//! - [`degree`]: degree distributions, neighbor/excess transforms, group partitions
//! - [`dynamics`]: controlled mean-field dynamics, Heun integration, objective and spend
//! - [`strategies`]: no-control, budget-matched static and bang-bang baselines
//! - [`transcribe`]: direct transcription of the control problem and its adjoint gradients
//! - [`solver`]: augmented-Lagrangian solver with projected-gradient inner iterations
//! - [`netsim`]: configuration-model graphs and stochastic SI simulation
//! - [`export`]: figure-ready CSV renderings of library results

pub mod degree;
pub mod dynamics;
pub mod exec;
pub mod export;
pub mod netsim;
pub mod solver;
pub mod strategies;
pub mod transcribe;

mod error;

pub use error::{Error, Result};
