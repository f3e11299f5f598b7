//! Direct transcription of the budget-constrained control problem into a
//! finite NLP over the sampled control values, with exact reverse-mode
//! gradients of the discrete scheme.
//!
//! The decision vector stacks `u_1(t_0..t_N), …, u_M(·), v_1(·), …, v_M(·)`
//! (length `2·M·(N+1)`). The objective and the single equality constraint
//! (`spend - B`) are evaluated by the same integration code as the dynamics
//! module, so transcribed values agree bit-for-bit with direct evaluation.
//!
//! Gradients are adjoints of the discrete Heun recursion itself (not a
//! discretization of a continuous adjoint): each predictor-corrector step is
//! differentiated exactly, and the spend sum injects its state sensitivities
//! at every grid point along the backward sweep.

use crate::dynamics::{
    budget_spend, heun_forward, integrate_heun, objective, ControlSchedule, MeanFieldSystem,
    ModelParams, TimeGrid, Trajectory,
};
use crate::Result;

/// Finite-dimensional transcription of the campaign problem.
pub struct NlpProblem<'a> {
    sys: &'a MeanFieldSystem,
    params: &'a ModelParams,
    grid: TimeGrid,
}

/// Objective and constraint values at a decision vector.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    /// Campaign reward J (to be maximized).
    pub objective: f64,
    pub spend: f64,
    /// Equality constraint value `spend - B`.
    pub constraint: f64,
}

/// Gradients of the objective and of the constraint at a decision vector.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub objective: Vec<f64>,
    pub constraint: Vec<f64>,
}

impl<'a> NlpProblem<'a> {
    pub fn new(sys: &'a MeanFieldSystem, params: &'a ModelParams, grid: TimeGrid) -> Self {
        Self { sys, params, grid }
    }

    pub fn sys(&self) -> &MeanFieldSystem {
        self.sys
    }

    pub fn params(&self) -> &ModelParams {
        self.params
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn num_groups(&self) -> usize {
        self.sys.num_groups()
    }

    pub fn num_vars(&self) -> usize {
        2 * self.sys.num_groups() * self.grid.num_points()
    }

    fn u_index(&self, m: usize, n: usize) -> usize {
        m * self.grid.num_points() + n
    }

    fn v_index(&self, m: usize, n: usize) -> usize {
        (self.sys.num_groups() + m) * self.grid.num_points() + n
    }

    /// Per-coordinate upper bounds (`u_max` then `v_max` blocks); lower
    /// bounds are all zero.
    pub fn upper_bounds(&self) -> Vec<f64> {
        let points = self.grid.num_points();
        let m = self.sys.num_groups();
        let mut hi = vec![self.params.u_max; m * points];
        hi.extend(std::iter::repeat_n(self.params.v_max, m * points));
        hi
    }

    pub fn decode(&self, x: &[f64]) -> ControlSchedule {
        debug_assert_eq!(x.len(), self.num_vars());
        let mut schedule = ControlSchedule::zeros(self.sys.num_groups(), self.grid);
        for m in 0..self.sys.num_groups() {
            for n in 0..self.grid.num_points() {
                schedule.u[m][n] = x[self.u_index(m, n)];
                schedule.v[m][n] = x[self.v_index(m, n)];
            }
        }
        schedule
    }

    pub fn encode(&self, schedule: &ControlSchedule) -> Vec<f64> {
        let mut x = vec![0.0; self.num_vars()];
        for m in 0..self.sys.num_groups() {
            for n in 0..self.grid.num_points() {
                x[self.u_index(m, n)] = schedule.u[m][n];
                x[self.v_index(m, n)] = schedule.v[m][n];
            }
        }
        x
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        let (eval, _) = self.evaluate_with_trajectory(x)?;
        Ok(eval)
    }

    pub fn evaluate_with_trajectory(&self, x: &[f64]) -> Result<(Evaluation, Trajectory)> {
        let schedule = self.decode(x);
        let traj = integrate_heun(self.sys, self.params, &schedule)?;
        let j = objective(self.sys, &traj);
        let spend = budget_spend(self.sys, self.params, &schedule, &traj);
        Ok((
            Evaluation {
                objective: j,
                spend,
                constraint: spend - self.params.budget,
            },
            traj,
        ))
    }

    /// Exact gradients of the transcribed objective and constraint.
    pub fn gradient(&self, x: &[f64]) -> Result<Gradients> {
        let schedule = self.decode(x);
        let fwd = heun_forward(self.sys, self.params, &schedule, true)?;
        let ws = AdjointSweep::new(self.sys, self.params, &schedule, &fwd.states, &fwd.predictors);
        let grad_objective = ws.objective_gradient(self);
        let grad_constraint = ws.spend_gradient(self);
        Ok(Gradients {
            objective: grad_objective,
            constraint: grad_constraint,
        })
    }
}

/// Shared forward data and scratch space for one backward sweep.
struct AdjointSweep<'s> {
    sys: &'s MeanFieldSystem,
    params: &'s ModelParams,
    schedule: &'s ControlSchedule,
    states: &'s [Vec<f64>],
    predictors: &'s [Vec<f64>],
    /// ī_m(t_n) per grid point.
    ibar: Vec<Vec<f64>>,
    /// s̄(t_n) per grid point.
    sbar: Vec<f64>,
}

impl<'s> AdjointSweep<'s> {
    fn new(
        sys: &'s MeanFieldSystem,
        params: &'s ModelParams,
        schedule: &'s ControlSchedule,
        states: &'s [Vec<f64>],
        predictors: &'s [Vec<f64>],
    ) -> Self {
        let mut ibar = Vec::with_capacity(states.len());
        let mut sbar = Vec::with_capacity(states.len());
        for state in states {
            let mut row = vec![0.0; sys.num_groups()];
            sys.group_link_infection(state, &mut row);
            ibar.push(row);
            sbar.push(sys.neighbor_susceptibility(state));
        }
        Self {
            sys,
            params,
            schedule,
            states,
            predictors,
            ibar,
            sbar,
        }
    }

    fn objective_gradient(&self, problem: &NlpProblem) -> Vec<f64> {
        let pmf = self.sys.dist().pmf().to_vec();
        self.backward(problem, pmf, |_n, _seed| {})
    }

    fn spend_gradient(&self, problem: &NlpProblem) -> Vec<f64> {
        let num_classes = self.sys.num_classes();
        let dt = self.schedule.grid.dt();
        let mut grad = self.backward(problem, vec![0.0; num_classes], |n, seed| {
            self.add_spend_state_seed(n, dt, seed)
        });
        // Direct dependence of the spend sum on the controls at n >= 1.
        for n in 1..self.schedule.grid.num_points() {
            let t = self.schedule.grid.time(n);
            let beta = self.params.beta_at(t);
            for m in 0..self.sys.num_groups() {
                let u = self.schedule.u[m][n];
                let v = self.schedule.v[m][n];
                grad[problem.u_index(m, n)] +=
                    2.0 * self.sys.partition().masses()[m] * self.params.b_hat[m] * u * dt;
                grad[problem.v_index(m, n)] += 3.0
                    * self.params.alpha
                    * beta
                    * self.params.wom_cost_weight
                    * self.params.c_hat[m]
                    * v
                    * v
                    * self.ibar[n][m]
                    * self.sbar[n]
                    * dt;
            }
        }
        grad
    }

    /// Sensitivity of the word-of-mouth cost at grid point `n` to the state:
    /// `∂/∂i_j Σ_m coef_m·ī_m·s̄ = coef_{g(j)}·k_j·p_j·s̄ - r_j·Σ_m coef_m·ī_m`.
    fn add_spend_state_seed(&self, n: usize, dt: f64, seed: &mut [f64]) {
        let t = self.schedule.grid.time(n);
        let beta = self.params.beta_at(t);
        let num_groups = self.sys.num_groups();
        let mut coef = vec![0.0; num_groups];
        let mut coef_ibar = 0.0;
        for (m, c) in coef.iter_mut().enumerate() {
            let v = self.schedule.v[m][n];
            *c = self.params.alpha
                * beta
                * self.params.wom_cost_weight
                * self.params.c_hat[m]
                * v
                * v
                * v;
            coef_ibar += *c * self.ibar[n][m];
        }
        let pmf = self.sys.dist().pmf();
        let r = self.sys.neighbor().neighbor_pmf();
        let sbar = self.sbar[n];
        for idx in 0..seed.len() {
            let g = self.sys.group_of()[idx];
            seed[idx] +=
                dt * (coef[g] * self.sys.degrees_f()[idx] * pmf[idx] * sbar - r[idx] * coef_ibar);
        }
    }

    /// Reverse sweep through the Heun recursion.
    ///
    /// `lambda` starts as the terminal seed ∂L/∂i_N; `inject` adds the
    /// direct state sensitivity ∂L/∂i_n before step n is unwound. Clamping
    /// is treated as the identity, which is exact whenever it was inactive
    /// on the forward pass (tracked by the trajectory's `clamp_drift`).
    fn backward<F>(&self, problem: &NlpProblem, mut lambda: Vec<f64>, inject: F) -> Vec<f64>
    where
        F: Fn(usize, &mut [f64]),
    {
        let grid = self.schedule.grid;
        let dt = grid.dt();
        let num_classes = self.sys.num_classes();
        let num_groups = self.sys.num_groups();
        let mut grad = vec![0.0; problem.num_vars()];

        let mut u0 = vec![0.0; num_groups];
        let mut v0 = vec![0.0; num_groups];
        let mut u1 = vec![0.0; num_groups];
        let mut v1 = vec![0.0; num_groups];
        let mut w_buf = vec![0.0; num_groups];
        let mut du = vec![0.0; num_groups];
        let mut dv = vec![0.0; num_groups];
        let mut aty = vec![0.0; num_classes];
        let mut y = vec![0.0; num_classes];

        for n in (1..grid.num_points()).rev() {
            inject(n, &mut lambda);

            let t0 = grid.time(n - 1);
            let t1 = grid.time(n);
            self.schedule.gather(n - 1, &mut u0, &mut v0);
            self.schedule.gather(n, &mut u1, &mut v1);

            // Right stage: f evaluated at the predictor with the controls at t_n.
            self.stage_adjoint(
                &self.predictors[n],
                t1,
                &u1,
                &v1,
                &lambda,
                &mut w_buf,
                &mut aty,
                &mut du,
                &mut dv,
            );
            for m in 0..num_groups {
                grad[problem.u_index(m, n)] += 0.5 * dt * du[m];
                grad[problem.v_index(m, n)] += 0.5 * dt * dv[m];
            }
            for idx in 0..num_classes {
                y[idx] = 0.5 * dt * lambda[idx] + 0.5 * dt * dt * aty[idx];
            }
            let w2 = aty.clone();

            // Left stage: f evaluated at the stored state with controls at t_{n-1}.
            self.stage_adjoint(
                &self.states[n - 1],
                t0,
                &u0,
                &v0,
                &y,
                &mut w_buf,
                &mut aty,
                &mut du,
                &mut dv,
            );
            for m in 0..num_groups {
                grad[problem.u_index(m, n - 1)] += du[m];
                grad[problem.v_index(m, n - 1)] += dv[m];
            }
            for idx in 0..num_classes {
                lambda[idx] += 0.5 * dt * w2[idx] + aty[idx];
            }
        }
        grad
    }

    /// Transposed Jacobian products of one rhs evaluation at (`state`, `t`).
    ///
    /// Writes `Aᵀy` into `aty` and the control partials `(∂f/∂u)ᵀy`,
    /// `(∂f/∂v)ᵀy` into `du`/`dv`. The rhs Jacobian splits into a diagonal
    /// and a rank-one-per-group part, so everything is a single pass.
    #[allow(clippy::too_many_arguments)]
    fn stage_adjoint(
        &self,
        state: &[f64],
        t: f64,
        u: &[f64],
        v: &[f64],
        yv: &[f64],
        w_buf: &mut [f64],
        aty: &mut [f64],
        du: &mut [f64],
        dv: &mut [f64],
    ) {
        let beta_alpha = self.params.beta_at(t) * self.params.alpha;
        self.sys.excess_infection(state, w_buf);
        let coupled: f64 = w_buf
            .iter()
            .zip(v)
            .map(|(&wp, &vp)| (1.0 + vp) * wp)
            .sum();

        du.fill(0.0);
        let mut sigma = 0.0;
        let degrees = self.sys.degrees_f();
        let groups = self.sys.group_of();
        for idx in 0..state.len() {
            let susceptible = 1.0 - state[idx];
            sigma += beta_alpha * degrees[idx] * susceptible * yv[idx];
            du[groups[idx]] += susceptible * yv[idx];
        }
        for m in 0..dv.len() {
            dv[m] = w_buf[m] * sigma;
        }
        let q = self.sys.neighbor().excess_pmf();
        for idx in 0..state.len() {
            let diag = beta_alpha * degrees[idx] * coupled + u[groups[idx]];
            aty[idx] = -diag * yv[idx] + (1.0 + v[groups[idx]]) * q[idx] * sigma;
        }
    }
}
