//! Shared fixtures for integration tests: the three study networks and an
//! independent fixed-step RK4 reference integrator for the uncontrolled
//! dynamics (its right-hand side is written from scratch on purpose — it
//! must not share code with the library's integrator).

#![allow(dead_code)]

use campaign_core::degree::{DegreeDistribution, GroupPartition};
use campaign_core::dynamics::MeanFieldSystem;

pub const NETWORKS: [&str; 3] = ["ER", "PL3", "PL2"];

pub fn distribution(name: &str) -> DegreeDistribution {
    match name {
        "ER" => DegreeDistribution::truncated_poisson(23.60, 1, 60).unwrap(),
        "PL3" => DegreeDistribution::power_law(3.0, 13, 300).unwrap(),
        "PL2" => DegreeDistribution::power_law(2.0, 6, 300).unwrap(),
        other => panic!("unknown network {other}"),
    }
}

pub fn system(name: &str, groups: usize) -> MeanFieldSystem {
    let dist = distribution(name);
    let part = GroupPartition::equal_mass(&dist, groups).unwrap();
    MeanFieldSystem::new(dist, part).unwrap()
}

/// Reference integrator: classic fourth-order Runge-Kutta on a fine uniform
/// grid for the uncontrolled SI dynamics. Returns the states at every step
/// (`steps + 1` rows).
pub struct Rk4Oracle {
    degrees: Vec<f64>,
    excess: Vec<f64>,
    beta: f64,
    alpha: f64,
}

impl Rk4Oracle {
    pub fn new(dist: &DegreeDistribution, beta: f64, alpha: f64) -> Self {
        // Excess degree distribution derived directly from the pmf:
        // q_k = (k+1) p_{k+1} / k̄.
        let mean: f64 = dist.degrees().zip(dist.pmf()).map(|(k, p)| k as f64 * p).sum();
        let pmf = dist.pmf();
        let n = pmf.len();
        let mut excess = vec![0.0; n];
        for idx in 0..n - 1 {
            let k_next = (dist.k_min() + idx + 1) as f64;
            excess[idx] = k_next * pmf[idx + 1] / mean;
        }
        Self {
            degrees: dist.degrees().map(|k| k as f64).collect(),
            excess,
            beta,
            alpha,
        }
    }

    fn derivative(&self, state: &[f64]) -> Vec<f64> {
        let coupling: f64 = self
            .excess
            .iter()
            .zip(state)
            .map(|(&q, &i)| q * i)
            .sum();
        state
            .iter()
            .zip(&self.degrees)
            .map(|(&i, &k)| self.beta * self.alpha * k * (1.0 - i) * coupling)
            .collect()
    }

    pub fn integrate(&self, i0: f64, horizon: f64, steps: usize) -> Vec<Vec<f64>> {
        let dt = horizon / steps as f64;
        let n = self.degrees.len();
        let mut state = vec![i0; n];
        let mut out = Vec::with_capacity(steps + 1);
        out.push(state.clone());
        for _ in 0..steps {
            let k1 = self.derivative(&state);
            let mid1: Vec<f64> = (0..n).map(|j| state[j] + 0.5 * dt * k1[j]).collect();
            let k2 = self.derivative(&mid1);
            let mid2: Vec<f64> = (0..n).map(|j| state[j] + 0.5 * dt * k2[j]).collect();
            let k3 = self.derivative(&mid2);
            let end: Vec<f64> = (0..n).map(|j| state[j] + dt * k3[j]).collect();
            let k4 = self.derivative(&end);
            for j in 0..n {
                state[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            out.push(state.clone());
        }
        out
    }
}

/// Largest per-class deviation between a Heun trajectory on `coarse_steps`
/// and the oracle sampled at the matching times.
pub fn sup_norm_vs_oracle(
    heun_states: &[Vec<f64>],
    oracle_states: &[Vec<f64>],
    oracle_stride: usize,
) -> f64 {
    let mut worst = 0.0f64;
    for (n, row) in heun_states.iter().enumerate() {
        let reference = &oracle_states[n * oracle_stride];
        for (a, b) in row.iter().zip(reference) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}
