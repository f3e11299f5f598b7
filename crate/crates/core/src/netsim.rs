//! Configuration-model graphs and discrete-time Monte Carlo SI spreading.
//!
//! Degrees are sampled i.i.d. from the degree distribution, half-edges are
//! paired uniformly at random (self-loops and parallel edges kept, one
//! leftover half-edge discarded), and the epidemic is advanced in fixed
//! steps: every infected node is an active spreader with probability
//! `α(1 + v_m(t))` redrawn each step, each susceptible flips per active
//! neighbor with probability `β(t)·dt` and additionally with probability
//! `u_m(t)·dt` from direct recruitment.

use crate::degree::DegreeDistribution;
use crate::dynamics::{ControlSchedule, ModelParams};
use crate::exec::{run_indexed, ExecMode};
use crate::{Error, Result};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Configuration-model graph in CSR form, with each node's sampled degree
/// class retained for control-group lookup and per-class reporting.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    /// Sampled degree per node (the held degree may be one lower if this
    /// node owned the single discarded half-edge).
    sampled_degree: Vec<u32>,
    num_edges: usize,
}

impl Graph {
    pub fn num_nodes(&self) -> usize {
        self.sampled_degree.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.targets[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn sampled_degree(&self, node: usize) -> usize {
        self.sampled_degree[node] as usize
    }

    /// Edge list (u, v) with u ≤ v per stored pairing; self-loops included.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut edges = Vec::with_capacity(self.num_edges);
        for node in 0..self.num_nodes() {
            for &next in self.neighbors(node) {
                if node as u32 <= next {
                    edges.push((node as u32, next));
                }
            }
        }
        // Each self-loop appears twice in the adjacency but is one edge.
        let mut seen_loops = std::collections::HashMap::new();
        edges.retain(|&(a, b)| {
            if a != b {
                return true;
            }
            let count = seen_loops.entry(a).or_insert(0u32);
            *count += 1;
            *count % 2 == 1
        });
        edges
    }
}

/// Samples a configuration-model graph: i.i.d. degrees from `dist`, then a
/// uniform random pairing of half-edges.
pub fn sample_configuration_model(
    dist: &DegreeDistribution,
    n_nodes: usize,
    seed: u64,
) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_configuration_model_with(dist, n_nodes, &mut rng)
}

pub(crate) fn sample_configuration_model_with(
    dist: &DegreeDistribution,
    n_nodes: usize,
    rng: &mut impl Rng,
) -> Result<Graph> {
    if n_nodes < 2 {
        return Err(Error::InvalidSimulation(format!(
            "need at least 2 nodes, got {n_nodes}"
        )));
    }
    let cum = dist.cumulative();
    let k_min = dist.k_min();

    let mut sampled_degree = Vec::with_capacity(n_nodes);
    let mut stubs: Vec<u32> = Vec::new();
    for node in 0..n_nodes {
        let draw: f64 = rng.gen();
        let idx = cum.partition_point(|&c| c < draw).min(cum.len() - 1);
        let degree = k_min + idx;
        sampled_degree.push(degree as u32);
        stubs.extend(std::iter::repeat_n(node as u32, degree));
    }

    // Uniform pairing via Fisher-Yates; an odd half-edge count leaves the
    // last stub unpaired and it is dropped.
    for i in (1..stubs.len()).rev() {
        let j = rng.gen_range(0..=i);
        stubs.swap(i, j);
    }
    let num_edges = stubs.len() / 2;

    let mut counts = vec![0usize; n_nodes];
    for pair in stubs.chunks_exact(2) {
        counts[pair[0] as usize] += 1;
        counts[pair[1] as usize] += 1;
    }
    let mut offsets = Vec::with_capacity(n_nodes + 1);
    let mut acc = 0usize;
    offsets.push(0);
    for &c in &counts {
        acc += c;
        offsets.push(acc);
    }
    let mut cursor = offsets.clone();
    let mut targets = vec![0u32; acc];
    for pair in stubs.chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        targets[cursor[a as usize]] = b;
        cursor[a as usize] += 1;
        targets[cursor[b as usize]] = a;
        cursor[b as usize] += 1;
    }

    Ok(Graph {
        offsets,
        targets,
        sampled_degree,
        num_edges,
    })
}

/// One stochastic SI run sampled on the simulation grid.
#[derive(Debug, Clone)]
pub struct SimTrajectory {
    pub times: Vec<f64>,
    /// Fraction of infected nodes at each sample time.
    pub total_infected: Vec<f64>,
    /// Per degree class infected fraction, `[sample][class]`; classes with
    /// no sampled node report zero.
    pub per_class: Vec<Vec<f64>>,
}

/// Simulates the controlled SI process on `graph`.
///
/// Controls are piecewise constant between schedule grid points (left
/// value); `dt` must not exceed the schedule's grid spacing and every
/// per-step probability must stay within [0, 1].
pub fn simulate_si(
    graph: &Graph,
    dist: &DegreeDistribution,
    part: &crate::degree::GroupPartition,
    params: &ModelParams,
    schedule: &ControlSchedule,
    dt: f64,
    seed: u64,
) -> Result<SimTrajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_si_with(graph, dist, part, params, schedule, dt, &mut rng)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn simulate_si_with(
    graph: &Graph,
    dist: &DegreeDistribution,
    part: &crate::degree::GroupPartition,
    params: &ModelParams,
    schedule: &ControlSchedule,
    dt: f64,
    rng: &mut impl Rng,
) -> Result<SimTrajectory> {
    let grid = schedule.grid;
    if dt > grid.dt() + 1e-12 {
        return Err(Error::InvalidSimulation(format!(
            "simulation step {dt} exceeds the control grid spacing {}",
            grid.dt()
        )));
    }
    if params.alpha * (1.0 + params.v_max) > 1.0 + 1e-12 {
        return Err(Error::InvalidSimulation(
            "alpha*(1+v_max) must not exceed 1".into(),
        ));
    }
    let beta_max = params.profile.max_rate();
    if beta_max * dt > 1.0 || params.u_max * dt > 1.0 {
        return Err(Error::InvalidSimulation(
            "per-step infection probability exceeds 1; reduce dt".into(),
        ));
    }

    let n_steps = (grid.horizon() / dt).round().max(1.0) as usize;
    let dt = grid.horizon() / n_steps as f64;
    let n_nodes = graph.num_nodes();

    // Group index per node from its sampled degree class.
    let group_of_node: Vec<u16> = (0..n_nodes)
        .map(|node| part.group_of_degree(graph.sampled_degree(node)) as u16)
        .collect();

    let mut infected = vec![false; n_nodes];
    for status in infected.iter_mut() {
        *status = rng.gen::<f64>() < params.i0;
    }

    let num_classes = dist.num_classes();
    let class_counts = {
        let mut counts = vec![0usize; num_classes];
        for node in 0..n_nodes {
            counts[graph.sampled_degree(node) - dist.k_min()] += 1;
        }
        counts
    };

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut total = Vec::with_capacity(n_steps + 1);
    let mut per_class = Vec::with_capacity(n_steps + 1);
    let record = |infected: &[bool], times: &mut Vec<f64>, total: &mut Vec<f64>, per_class: &mut Vec<Vec<f64>>, t: f64| {
        let mut class_infected = vec![0usize; num_classes];
        let mut count = 0usize;
        for node in 0..n_nodes {
            if infected[node] {
                count += 1;
                class_infected[graph.sampled_degree(node) - dist.k_min()] += 1;
            }
        }
        times.push(t);
        total.push(count as f64 / n_nodes as f64);
        per_class.push(
            class_infected
                .iter()
                .zip(&class_counts)
                .map(|(&inf, &tot)| if tot > 0 { inf as f64 / tot as f64 } else { 0.0 })
                .collect(),
        );
    };
    record(&infected, &mut times, &mut total, &mut per_class, 0.0);

    let num_groups = schedule.num_groups();
    let mut u_now = vec![0.0; num_groups];
    let mut v_now = vec![0.0; num_groups];
    let mut active = vec![false; n_nodes];
    let mut newly_infected: Vec<u32> = Vec::new();

    for step in 0..n_steps {
        let t = step as f64 * dt;
        // Left control value of the grid interval containing t.
        let grid_idx = ((t / grid.dt()).floor() as usize).min(grid.num_points() - 1);
        schedule.gather(grid_idx, &mut u_now, &mut v_now);
        let beta_dt = params.beta_at(t) * dt;

        // Redraw spreader activity for the infected population.
        for node in 0..n_nodes {
            active[node] = infected[node] && {
                let p_active = params.alpha * (1.0 + v_now[group_of_node[node] as usize]);
                rng.gen::<f64>() < p_active
            };
        }

        newly_infected.clear();
        for node in 0..n_nodes {
            if infected[node] {
                continue;
            }
            let active_neighbors = graph
                .neighbors(node)
                .iter()
                .filter(|&&nb| active[nb as usize])
                .count();
            let p_spread = 1.0 - (1.0 - beta_dt).powi(active_neighbors as i32);
            let p_direct = u_now[group_of_node[node] as usize] * dt;
            let p_infect = 1.0 - (1.0 - p_spread) * (1.0 - p_direct);
            if p_infect > 0.0 && rng.gen::<f64>() < p_infect {
                newly_infected.push(node as u32);
            }
        }
        for &node in &newly_infected {
            infected[node as usize] = true;
        }
        record(&infected, &mut times, &mut total, &mut per_class, (step + 1) as f64 * dt);
    }

    Ok(SimTrajectory {
        times,
        total_infected: total,
        per_class,
    })
}

/// Specification of an ensemble of independent simulation runs; each run
/// gets a fresh graph and its own deterministic RNG streams.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub n_nodes: usize,
    pub n_runs: usize,
    pub dt: f64,
}

/// Pointwise ensemble statistics of the infected fraction.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Runs `spec.n_runs` independent simulations, aggregating i(t) pointwise.
#[allow(clippy::too_many_arguments)]
pub fn ensemble(
    dist: &DegreeDistribution,
    part: &crate::degree::GroupPartition,
    params: &ModelParams,
    schedule: &ControlSchedule,
    spec: &EnsembleSpec,
    seed: u64,
    mode: ExecMode,
) -> Result<EnsembleResult> {
    if spec.n_runs == 0 {
        return Err(Error::InvalidSimulation("need at least one run".into()));
    }
    let runs: Vec<Result<SimTrajectory>> = run_indexed(mode, spec.n_runs, |run| {
        let mut graph_rng = ChaCha8Rng::seed_from_u64(seed);
        graph_rng.set_stream(2 * run as u64);
        let graph = sample_configuration_model_with(dist, spec.n_nodes, &mut graph_rng)?;
        let mut sim_rng = ChaCha8Rng::seed_from_u64(seed);
        sim_rng.set_stream(2 * run as u64 + 1);
        simulate_si_with(&graph, dist, part, params, schedule, spec.dt, &mut sim_rng)
    });

    let mut trajectories = Vec::with_capacity(spec.n_runs);
    for run in runs {
        trajectories.push(run?);
    }
    let times = trajectories[0].times.clone();
    let n_points = times.len();
    let n_runs = trajectories.len() as f64;
    let mut mean = vec![0.0; n_points];
    for traj in &trajectories {
        for (acc, &x) in mean.iter_mut().zip(&traj.total_infected) {
            *acc += x;
        }
    }
    for m in &mut mean {
        *m /= n_runs;
    }
    let mut std = vec![0.0; n_points];
    if trajectories.len() > 1 {
        for traj in &trajectories {
            for (acc, (&x, &mu)) in std.iter_mut().zip(traj.total_infected.iter().zip(&mean)) {
                *acc += (x - mu) * (x - mu);
            }
        }
        for s in &mut std {
            *s = (*s / (n_runs - 1.0)).sqrt();
        }
    }
    Ok(EnsembleResult { times, mean, std })
}
