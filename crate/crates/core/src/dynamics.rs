//! Controlled degree-based mean-field SI dynamics.
//!
//! The infected fraction of degree class `k` in control group `m` evolves as
//!
//! ```text
//! di_k/dt = β(t)·(1 - i_k)·k·α·Σ_p (1 + v_p(t))·Σ_{l∈K_p} q_l·i_l  +  u_m(t)·(1 - i_k)
//! ```
//!
//! and is integrated with Heun's predictor-corrector method on a uniform
//! grid. The campaign objective is the final infected fraction and the spend
//! is a right-endpoint Riemann sum of the quadratic control costs.

use crate::degree::{DegreeDistribution, GroupPartition, NeighborDistributions};
use crate::{Error, Result};

/// Time profile of the spreading rate β(t) over the campaign horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpreadingProfile {
    Constant { rate: f64 },
    /// β(t) = peak·(1 - t/T)
    LinearDecreasing { peak: f64 },
    /// β(t) = peak·t/T
    LinearIncreasing { peak: f64 },
}

impl SpreadingProfile {
    pub fn rate_at(&self, t: f64, horizon: f64) -> f64 {
        match *self {
            SpreadingProfile::Constant { rate } => rate,
            SpreadingProfile::LinearDecreasing { peak } => peak * (1.0 - t / horizon),
            SpreadingProfile::LinearIncreasing { peak } => peak * t / horizon,
        }
    }

    /// Largest value β(t) attains on `[0, T]`.
    pub fn max_rate(&self) -> f64 {
        match *self {
            SpreadingProfile::Constant { rate } => rate,
            SpreadingProfile::LinearDecreasing { peak } => peak,
            SpreadingProfile::LinearIncreasing { peak } => peak,
        }
    }
}

/// All scalars and profiles of the controlled campaign problem.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub profile: SpreadingProfile,
    /// Fraction of the infected population that spreads without incentives.
    pub alpha: f64,
    /// Seed infected fraction at t = 0.
    pub i0: f64,
    /// Campaign deadline T.
    pub horizon: f64,
    pub u_max: f64,
    pub v_max: f64,
    /// Per-group direct-cost weights b̂_m.
    pub b_hat: Vec<f64>,
    /// Per-group word-of-mouth cost weights ĉ_m.
    pub c_hat: Vec<f64>,
    /// Relative word-of-mouth cost d.
    pub wom_cost_weight: f64,
    /// Per-node campaign budget B.
    pub budget: f64,
}

impl ModelParams {
    /// Paper-baseline parameters for `num_groups` control groups:
    /// β = 0.12 constant, α = 0.5, i₀ = 0.01, T = 1, u_max = 0.12,
    /// v_max = 0.5, b̂ = ĉ = 1, d = 0.5, B = u_max²·T/8.
    pub fn baseline(num_groups: usize) -> Self {
        let u_max: f64 = 0.12;
        let horizon = 1.0;
        Self {
            profile: SpreadingProfile::Constant { rate: 0.12 },
            alpha: 0.5,
            i0: 0.01,
            horizon,
            u_max,
            v_max: 0.5,
            b_hat: vec![1.0; num_groups],
            c_hat: vec![1.0; num_groups],
            wom_cost_weight: 0.5,
            budget: u_max * u_max * horizon / 8.0,
        }
    }

    pub fn beta_at(&self, t: f64) -> f64 {
        self.profile.rate_at(t, self.horizon)
    }

    pub fn validate(&self, num_groups: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParams(format!("alpha {} not in (0,1]", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.i0) {
            return Err(Error::InvalidParams(format!("i0 {} not in [0,1)", self.i0)));
        }
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(Error::InvalidParams("horizon must be positive".into()));
        }
        if self.u_max < 0.0 || self.v_max < 0.0 {
            return Err(Error::InvalidParams("control bounds must be nonnegative".into()));
        }
        if self.alpha * (1.0 + self.v_max) > 1.0 + 1e-12 {
            return Err(Error::InvalidParams(format!(
                "alpha*(1+v_max) = {} exceeds 1",
                self.alpha * (1.0 + self.v_max)
            )));
        }
        if self.b_hat.len() != num_groups || self.c_hat.len() != num_groups {
            return Err(Error::InvalidParams(format!(
                "cost weights must have one entry per group ({num_groups})"
            )));
        }
        if self.b_hat.iter().chain(&self.c_hat).any(|&w| w < 0.0) {
            return Err(Error::InvalidParams("cost weights must be nonnegative".into()));
        }
        if self.wom_cost_weight < 0.0 || self.budget < 0.0 {
            return Err(Error::InvalidParams("d and B must be nonnegative".into()));
        }
        if self.profile.max_rate() < 0.0 {
            return Err(Error::InvalidParams("spreading rate must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Uniform grid of `steps + 1` points on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::InvalidGrid("horizon must be positive".into()));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("need at least one interval".into()));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of intervals N.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points N + 1.
    pub fn num_points(&self) -> usize {
        self.steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.horizon * n as f64 / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.num_points()).map(|n| self.time(n)).collect()
    }
}

/// Sampled control values on the grid, one row per group: `u[m][n]`, `v[m][n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    pub grid: TimeGrid,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl ControlSchedule {
    pub fn zeros(num_groups: usize, grid: TimeGrid) -> Self {
        let n = grid.num_points();
        Self {
            grid,
            u: vec![vec![0.0; n]; num_groups],
            v: vec![vec![0.0; n]; num_groups],
        }
    }

    /// Constant schedule `u ≡ u_level`, `v ≡ v_level` in every group.
    pub fn constant(num_groups: usize, grid: TimeGrid, u_level: f64, v_level: f64) -> Self {
        let n = grid.num_points();
        Self {
            grid,
            u: vec![vec![u_level; n]; num_groups],
            v: vec![vec![v_level; n]; num_groups],
        }
    }

    pub fn num_groups(&self) -> usize {
        self.u.len()
    }

    pub fn within_bounds(&self, u_max: f64, v_max: f64, tol: f64) -> bool {
        let ok = |rows: &Vec<Vec<f64>>, hi: f64| {
            rows.iter()
                .flatten()
                .all(|&x| x >= -tol && x <= hi + tol)
        };
        ok(&self.u, u_max) && ok(&self.v, v_max)
    }

    /// Copies the group values at grid point `n` into the provided buffers.
    pub(crate) fn gather(&self, n: usize, u_buf: &mut [f64], v_buf: &mut [f64]) {
        for (m, row) in self.u.iter().enumerate() {
            u_buf[m] = row[n];
        }
        for (m, row) in self.v.iter().enumerate() {
            v_buf[m] = row[n];
        }
    }
}

/// Precomputed network quantities the dynamics loop needs per class:
/// degree, pmf, neighbor/excess distributions and group membership.
#[derive(Debug, Clone)]
pub struct MeanFieldSystem {
    dist: DegreeDistribution,
    neighbor: NeighborDistributions,
    partition: GroupPartition,
    degrees_f: Vec<f64>,
    group_of: Vec<usize>,
}

impl MeanFieldSystem {
    pub fn new(dist: DegreeDistribution, partition: GroupPartition) -> Result<Self> {
        let neighbor = NeighborDistributions::from_distribution(&dist)?;
        let degrees_f = dist.degrees().map(|k| k as f64).collect();
        let group_of = partition.class_groups(dist.num_classes());
        Ok(Self {
            dist,
            neighbor,
            partition,
            degrees_f,
            group_of,
        })
    }

    pub fn dist(&self) -> &DegreeDistribution {
        &self.dist
    }

    pub fn neighbor(&self) -> &NeighborDistributions {
        &self.neighbor
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn num_classes(&self) -> usize {
        self.degrees_f.len()
    }

    pub fn num_groups(&self) -> usize {
        self.partition.num_groups()
    }

    pub fn degrees_f(&self) -> &[f64] {
        &self.degrees_f
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    /// Per-group excess-weighted infection `W_p = Σ_{l∈K_p} q_l i_l`.
    pub(crate) fn excess_infection(&self, state: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let q = self.neighbor.excess_pmf();
        for (idx, &g) in self.group_of.iter().enumerate() {
            out[g] += q[idx] * state[idx];
        }
    }

    /// Group link-weighted infection `ī_m = Σ_{k∈K_m} k i_k p_k`.
    pub(crate) fn group_link_infection(&self, state: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let p = self.dist.pmf();
        for (idx, &g) in self.group_of.iter().enumerate() {
            out[g] += self.degrees_f[idx] * state[idx] * p[idx];
        }
    }

    /// Mean neighbor susceptibility `s̄ = Σ_k r_k (1 - i_k)`.
    pub(crate) fn neighbor_susceptibility(&self, state: &[f64]) -> f64 {
        self.neighbor
            .neighbor_pmf()
            .iter()
            .zip(state)
            .map(|(&r, &i)| r * (1.0 - i))
            .sum()
    }
}

/// State and aggregates on the grid: `states[n][class]`, plus the derived
/// totals used by figures and the spend sum.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<Vec<f64>>,
    /// Total infected fraction i(t_n) = Σ p_k i_k(t_n).
    pub total_infected: Vec<f64>,
    /// ī_m(t_n) per grid point: `[n][m]`.
    pub group_link_infection: Vec<Vec<f64>>,
    /// s̄(t_n) per grid point.
    pub neighbor_susceptibility: Vec<f64>,
    /// Largest clamping correction applied by any Heun step.
    pub clamp_drift: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one point")
    }
}

/// Right-hand side of the controlled dynamics at time `t`.
///
/// `u` and `v` hold the per-group control values at `t`. The double sum over
/// groups and classes is folded once into `S = Σ_p (1+v_p) W_p` and reused
/// for every class.
pub fn rhs(
    sys: &MeanFieldSystem,
    state: &[f64],
    t: f64,
    u: &[f64],
    v: &[f64],
    params: &ModelParams,
) -> Vec<f64> {
    let mut out = vec![0.0; state.len()];
    let mut w = vec![0.0; sys.num_groups()];
    rhs_into(sys, state, t, u, v, params, &mut w, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn rhs_into(
    sys: &MeanFieldSystem,
    state: &[f64],
    t: f64,
    u: &[f64],
    v: &[f64],
    params: &ModelParams,
    w_buf: &mut [f64],
    out: &mut [f64],
) {
    sys.excess_infection(state, w_buf);
    let coupled: f64 = w_buf
        .iter()
        .zip(v)
        .map(|(&wp, &vp)| (1.0 + vp) * wp)
        .sum();
    let beta_alpha = params.beta_at(t) * params.alpha;
    for idx in 0..state.len() {
        let susceptible = 1.0 - state[idx];
        let m = sys.group_of()[idx];
        out[idx] = beta_alpha * sys.degrees_f()[idx] * susceptible * coupled + u[m] * susceptible;
    }
}

/// Raw Heun sweep shared by the public integrator and the adjoint code.
pub(crate) struct HeunForward {
    pub states: Vec<Vec<f64>>,
    /// Predictor state used by step n (index n; index 0 unused).
    pub predictors: Vec<Vec<f64>>,
    pub clamp_drift: f64,
}

pub(crate) fn heun_forward(
    sys: &MeanFieldSystem,
    params: &ModelParams,
    schedule: &ControlSchedule,
    keep_predictors: bool,
) -> Result<HeunForward> {
    let grid = schedule.grid;
    let num_classes = sys.num_classes();
    let num_groups = sys.num_groups();
    let dt = grid.dt();

    let mut states = Vec::with_capacity(grid.num_points());
    states.push(vec![params.i0; num_classes]);
    let mut predictors = Vec::new();
    if keep_predictors {
        predictors.push(vec![0.0; num_classes]);
    }

    let mut w_buf = vec![0.0; num_groups];
    let mut u0 = vec![0.0; num_groups];
    let mut v0 = vec![0.0; num_groups];
    let mut u1 = vec![0.0; num_groups];
    let mut v1 = vec![0.0; num_groups];
    let mut f_left = vec![0.0; num_classes];
    let mut f_right = vec![0.0; num_classes];
    let mut predictor = vec![0.0; num_classes];
    let mut clamp_drift: f64 = 0.0;

    for n in 1..grid.num_points() {
        let t_left = grid.time(n - 1);
        let t_right = grid.time(n);
        schedule.gather(n - 1, &mut u0, &mut v0);
        schedule.gather(n, &mut u1, &mut v1);

        let current = &states[n - 1];
        rhs_into(sys, current, t_left, &u0, &v0, params, &mut w_buf, &mut f_left);
        for idx in 0..num_classes {
            predictor[idx] = current[idx] + dt * f_left[idx];
        }
        rhs_into(sys, &predictor, t_right, &u1, &v1, params, &mut w_buf, &mut f_right);

        let mut next = vec![0.0; num_classes];
        for idx in 0..num_classes {
            let raw = current[idx] + 0.5 * dt * (f_left[idx] + f_right[idx]);
            if !raw.is_finite() {
                return Err(Error::NonFiniteState { step: n });
            }
            let clamped = raw.clamp(0.0, 1.0);
            clamp_drift = clamp_drift.max((raw - clamped).abs());
            next[idx] = clamped;
        }
        states.push(next);
        if keep_predictors {
            predictors.push(predictor.clone());
        }
    }

    Ok(HeunForward {
        states,
        predictors,
        clamp_drift,
    })
}

/// Integrates the controlled dynamics over the schedule's grid with Heun's
/// predictor-corrector step, clamping each state to `[0, 1]`.
pub fn integrate_heun(
    sys: &MeanFieldSystem,
    params: &ModelParams,
    schedule: &ControlSchedule,
) -> Result<Trajectory> {
    let fwd = heun_forward(sys, params, schedule, false)?;
    Ok(build_trajectory(sys, schedule.grid, fwd.states, fwd.clamp_drift))
}

pub(crate) fn build_trajectory(
    sys: &MeanFieldSystem,
    grid: TimeGrid,
    states: Vec<Vec<f64>>,
    clamp_drift: f64,
) -> Trajectory {
    let pmf = sys.dist().pmf();
    let mut total = Vec::with_capacity(states.len());
    let mut ibar = Vec::with_capacity(states.len());
    let mut sbar = Vec::with_capacity(states.len());
    for state in &states {
        total.push(pmf.iter().zip(state).map(|(&p, &i)| p * i).sum());
        let mut row = vec![0.0; sys.num_groups()];
        sys.group_link_infection(state, &mut row);
        ibar.push(row);
        sbar.push(sys.neighbor_susceptibility(state));
    }
    Trajectory {
        grid,
        states,
        total_infected: total,
        group_link_infection: ibar,
        neighbor_susceptibility: sbar,
        clamp_drift,
    }
}

/// Campaign reward `J = Σ_k p_k i_k(T)`.
pub fn objective(sys: &MeanFieldSystem, traj: &Trajectory) -> f64 {
    sys.dist()
        .pmf()
        .iter()
        .zip(traj.final_state())
        .map(|(&p, &i)| p * i)
        .sum()
}

/// Instantaneous per-group resource consumption rates at grid point `n`.
///
/// Direct: `g_m b̂_m u_m²`. Word-of-mouth: `α v_m β(t) d ĉ_m v_m² ī_m s̄`.
pub fn spend_rates_at(
    sys: &MeanFieldSystem,
    params: &ModelParams,
    schedule: &ControlSchedule,
    traj: &Trajectory,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let num_groups = sys.num_groups();
    let t = schedule.grid.time(n);
    let beta = params.beta_at(t);
    let masses = sys.partition().masses();
    let sbar = traj.neighbor_susceptibility[n];
    let mut direct = vec![0.0; num_groups];
    let mut wom = vec![0.0; num_groups];
    for m in 0..num_groups {
        let u = schedule.u[m][n];
        let v = schedule.v[m][n];
        direct[m] = masses[m] * params.b_hat[m] * u * u;
        wom[m] = params.alpha
            * beta
            * params.wom_cost_weight
            * params.c_hat[m]
            * v
            * v
            * v
            * traj.group_link_infection[n][m]
            * sbar;
    }
    (direct, wom)
}

/// Total campaign spend: right-endpoint Riemann sum of the per-group cost
/// rates over grid points `n = 1..N`.
pub fn budget_spend(
    sys: &MeanFieldSystem,
    params: &ModelParams,
    schedule: &ControlSchedule,
    traj: &Trajectory,
) -> f64 {
    let dt = schedule.grid.dt();
    let mut spend = 0.0;
    for n in 1..schedule.grid.num_points() {
        let (direct, wom) = spend_rates_at(sys, params, schedule, traj, n);
        let rate: f64 = direct.iter().sum::<f64>() + wom.iter().sum::<f64>();
        spend += rate * dt;
    }
    spend
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::DegreeDistribution;

    fn er_system(groups: usize) -> MeanFieldSystem {
        let dist = DegreeDistribution::truncated_poisson(23.60, 1, 60).unwrap();
        let part = GroupPartition::equal_mass(&dist, groups).unwrap();
        MeanFieldSystem::new(dist, part).unwrap()
    }

    fn pl2_system(groups: usize) -> MeanFieldSystem {
        let dist = DegreeDistribution::power_law(2.0, 6, 300).unwrap();
        let part = GroupPartition::equal_mass(&dist, groups).unwrap();
        MeanFieldSystem::new(dist, part).unwrap()
    }

    fn pl3_system(groups: usize) -> MeanFieldSystem {
        let dist = DegreeDistribution::power_law(3.0, 13, 300).unwrap();
        let part = GroupPartition::equal_mass(&dist, groups).unwrap();
        MeanFieldSystem::new(dist, part).unwrap()
    }

    #[test]
    fn rhs_vanishes_without_spread_or_recruitment() {
        let sys = er_system(3);
        let mut params = ModelParams::baseline(3);
        params.profile = SpreadingProfile::Constant { rate: 0.0 };
        let state = vec![0.3; sys.num_classes()];
        let d = rhs(&sys, &state, 0.5, &[0.0; 3], &[0.2; 3], &params);
        assert!(d.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rhs_vanishes_at_full_infection() {
        let sys = er_system(3);
        let params = ModelParams::baseline(3);
        let state = vec![1.0; sys.num_classes()];
        let d = rhs(&sys, &state, 0.2, &[0.12; 3], &[0.5; 3], &params);
        assert!(d.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rhs_matches_hand_evaluation_at_uniform_state() {
        // With i_k = i0 everywhere and v = 0, Σ_l q_l i_l = i0·Σ q_l, so
        // di_k/dt = β(1-i0)·k·α·i0·Σq + u_m(1-i0).
        let sys = er_system(2);
        let params = ModelParams::baseline(2);
        let i0 = 0.01;
        let state = vec![i0; sys.num_classes()];
        let u = [0.05, 0.02];
        let d = rhs(&sys, &state, 0.0, &u, &[0.0, 0.0], &params);
        let q_sum: f64 = sys.neighbor().excess_pmf().iter().sum();
        for (idx, k) in sys.dist().degrees().enumerate() {
            let m = sys.group_of()[idx];
            let expected = 0.12 * (1.0 - i0) * k as f64 * 0.5 * i0 * q_sum + u[m] * (1.0 - i0);
            assert!((d[idx] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_spread_zero_control_stays_at_seed() {
        let sys = er_system(3);
        let mut params = ModelParams::baseline(3);
        params.profile = SpreadingProfile::Constant { rate: 0.0 };
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let schedule = ControlSchedule::zeros(3, grid);
        let traj = integrate_heun(&sys, &params, &schedule).unwrap();
        for state in &traj.states {
            assert!(state.iter().all(|&i| i == 0.01));
        }
        assert!((objective(&sys, &traj) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn uncontrolled_finals_match_published_values() {
        let grid = TimeGrid::new(1.0, 50).unwrap();
        for (sys, expected) in [
            (er_system(3), 0.040),
            (pl3_system(3), 0.058),
            (pl2_system(3), 0.126),
        ] {
            let params = ModelParams::baseline(3);
            let schedule = ControlSchedule::zeros(3, grid);
            let traj = integrate_heun(&sys, &params, &schedule).unwrap();
            let j = objective(&sys, &traj);
            assert!(
                (j - expected).abs() < 0.002,
                "final infected {j} vs expected {expected}"
            );
        }
    }

    #[test]
    fn trajectory_is_monotone_and_bounded() {
        let sys = pl2_system(3);
        let params = ModelParams::baseline(3);
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let schedule = ControlSchedule::constant(3, grid, 0.12, 0.5);
        let traj = integrate_heun(&sys, &params, &schedule).unwrap();
        for n in 1..traj.states.len() {
            for idx in 0..sys.num_classes() {
                assert!(traj.states[n][idx] >= traj.states[n - 1][idx] - 1e-15);
                assert!((0.0..=1.0).contains(&traj.states[n][idx]));
            }
        }
        assert!(traj.clamp_drift < 1e-9);
    }

    #[test]
    fn objective_of_uniform_final_state() {
        let sys = er_system(1);
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let states = vec![vec![0.3; sys.num_classes()]; 5];
        let traj = build_trajectory(&sys, grid, states, 0.0);
        assert!((objective(&sys, &traj) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn full_intensity_direct_spend_has_closed_form() {
        // With v ≡ 0 and b̂ = 1 the spend is state-independent: u_max²·T.
        let sys = er_system(3);
        let mut params = ModelParams::baseline(3);
        params.v_max = 0.0;
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let schedule = ControlSchedule::constant(3, grid, params.u_max, 0.0);
        let traj = integrate_heun(&sys, &params, &schedule).unwrap();
        let spend = budget_spend(&sys, &params, &schedule, &traj);
        assert!((spend - 0.0144).abs() < 1e-15);
        assert!((params.budget - 0.0144 / 8.0).abs() < 1e-18);
    }

    #[test]
    fn zero_controls_spend_nothing() {
        let sys = pl3_system(3);
        let params = ModelParams::baseline(3);
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let schedule = ControlSchedule::zeros(3, grid);
        let traj = integrate_heun(&sys, &params, &schedule).unwrap();
        assert_eq!(budget_spend(&sys, &params, &schedule, &traj), 0.0);
    }

    #[test]
    fn spend_is_monotone_in_each_control_value() {
        let sys = er_system(3);
        let params = ModelParams::baseline(3);
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let schedule = ControlSchedule::constant(3, grid, 0.06, 0.25);
        let traj = integrate_heun(&sys, &params, &schedule).unwrap();
        let base = budget_spend(&sys, &params, &schedule, &traj);
        for m in 0..3 {
            for n in [1usize, 5, 10] {
                let mut bumped = schedule.clone();
                bumped.u[m][n] += 0.01;
                assert!(budget_spend(&sys, &params, &bumped, &traj) > base);
                let mut bumped = schedule.clone();
                bumped.v[m][n] += 0.01;
                assert!(budget_spend(&sys, &params, &bumped, &traj) > base);
            }
        }
    }

    #[test]
    fn params_validation_rejects_violations() {
        let mut p = ModelParams::baseline(3);
        p.alpha = 1.0;
        // alpha*(1+v_max) = 1.5 > 1
        assert!(p.validate(3).is_err());
        let mut p = ModelParams::baseline(3);
        p.i0 = 1.0;
        assert!(p.validate(3).is_err());
        let mut p = ModelParams::baseline(3);
        p.b_hat = vec![1.0; 2];
        assert!(p.validate(3).is_err());
        assert!(ModelParams::baseline(3).validate(3).is_ok());
    }

    #[test]
    fn linear_profiles_interpolate_peak() {
        let dec = SpreadingProfile::LinearDecreasing { peak: 0.24 };
        let inc = SpreadingProfile::LinearIncreasing { peak: 0.24 };
        assert!((dec.rate_at(0.0, 1.0) - 0.24).abs() < 1e-15);
        assert!(dec.rate_at(1.0, 1.0).abs() < 1e-15);
        assert!(inc.rate_at(0.0, 1.0).abs() < 1e-15);
        assert!((inc.rate_at(1.0, 1.0) - 0.24).abs() < 1e-15);
        assert!((inc.rate_at(0.5, 1.0) - 0.12).abs() < 1e-15);
    }
}
