//! Augmented-Lagrangian solver for the transcribed campaign problem.
//!
//! The single spend equality constraint is absorbed into an augmented
//! Lagrangian; each subproblem is minimized over the control boxes by a
//! projected-gradient method with Barzilai-Borwein steps and a nonmonotone
//! backtracking line search. Multi-start over calibrated and randomized
//! feasible schedules guards against poor local optima.

use crate::dynamics::{integrate_heun, ControlSchedule, MeanFieldSystem, ModelParams, Trajectory};
use crate::exec::{run_indexed, ExecMode};
use crate::strategies;
use crate::transcribe::NlpProblem;
use crate::{Error, Result};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stopping and multi-start controls for [`solve`].
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Projected-gradient tolerance, scaled by √(number of variables).
    pub tol_grad: f64,
    /// Relative spend-constraint tolerance |spend - B| / max(B, 1e-12).
    pub tol_con: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_grad: 1e-6,
            tol_con: 1e-8,
            max_outer: 40,
            max_inner: 2000,
            n_starts: 3,
            seed: 0,
        }
    }
}

/// Converged (or best-effort) solution of the transcribed problem.
#[derive(Debug, Clone)]
pub struct OptimalSolution {
    pub schedule: ControlSchedule,
    /// Final campaign reward J.
    pub objective: f64,
    pub spend: f64,
    /// Lagrange multiplier of the spend constraint.
    pub multiplier: f64,
    /// Inner iterations summed over all outer rounds of the winning start.
    pub iterations: usize,
    /// max(∞-norm of the projected Lagrangian gradient, relative spend residual).
    pub kkt_residual: f64,
    pub converged: bool,
}

struct StartResult {
    x: Vec<f64>,
    objective: f64,
    spend: f64,
    multiplier: f64,
    iterations: usize,
    kkt_residual: f64,
    converged: bool,
}

/// Solves the transcribed problem with the default execution mode.
pub fn solve(problem: &NlpProblem, opts: &SolverOptions) -> Result<OptimalSolution> {
    solve_with_mode(problem, opts, ExecMode::default())
}

/// Solves the transcribed problem, running multi-starts per `mode`.
pub fn solve_with_mode(
    problem: &NlpProblem,
    opts: &SolverOptions,
    mode: ExecMode,
) -> Result<OptimalSolution> {
    let params = problem.params();
    let grid = problem.grid();
    let sys = problem.sys();

    let full = ControlSchedule::constant(sys.num_groups(), grid, params.u_max, params.v_max);
    let full_traj = integrate_heun(sys, params, &full)?;
    let full_spend = crate::dynamics::budget_spend(sys, params, &full, &full_traj);
    if params.budget > full_spend {
        return Err(Error::InfeasibleBudget {
            budget: params.budget,
            full_spend,
        });
    }
    if params.budget == 0.0 {
        // The zero schedule is the only feasible point.
        let schedule = ControlSchedule::zeros(sys.num_groups(), grid);
        let traj = integrate_heun(sys, params, &schedule)?;
        return Ok(OptimalSolution {
            schedule,
            objective: crate::dynamics::objective(sys, &traj),
            spend: 0.0,
            multiplier: 0.0,
            iterations: 0,
            kkt_residual: 0.0,
            converged: true,
        });
    }

    let starts = build_starts(problem, opts)?;
    let results: Vec<Result<StartResult>> = run_indexed(mode, starts.len(), |idx| {
        augmented_lagrangian(problem, starts[idx].clone(), opts)
    });

    let mut best: Option<(usize, StartResult)> = None;
    for (idx, result) in results.into_iter().enumerate() {
        let candidate = result?;
        best = Some(match best.take() {
            None => (idx, candidate),
            Some((best_idx, incumbent)) => {
                if better_than(&candidate, &incumbent) {
                    (idx, candidate)
                } else {
                    (best_idx, incumbent)
                }
            }
        });
    }
    let (_, winner) = best.expect("at least one start");

    Ok(OptimalSolution {
        schedule: problem.decode(&winner.x),
        objective: winner.objective,
        spend: winner.spend,
        multiplier: winner.multiplier,
        iterations: winner.iterations,
        kkt_residual: winner.kkt_residual,
        converged: winner.converged,
    })
}

/// Runs the augmented-Lagrangian loop from one explicit starting schedule
/// (warm start); no multi-start is performed.
pub fn solve_from(
    problem: &NlpProblem,
    start: &ControlSchedule,
    opts: &SolverOptions,
) -> Result<OptimalSolution> {
    let result = augmented_lagrangian(problem, problem.encode(start), opts)?;
    Ok(OptimalSolution {
        schedule: problem.decode(&result.x),
        objective: result.objective,
        spend: result.spend,
        multiplier: result.multiplier,
        iterations: result.iterations,
        kkt_residual: result.kkt_residual,
        converged: result.converged,
    })
}

/// Ranks two finished starts: higher J wins; ties within 1e-10 go to the
/// lower KKT residual.
fn better_than(candidate: &StartResult, incumbent: &StartResult) -> bool {
    if (candidate.objective - incumbent.objective).abs() <= 1e-10 {
        candidate.kkt_residual < incumbent.kkt_residual
    } else {
        candidate.objective > incumbent.objective
    }
}

/// Initial guesses: calibrated static, calibrated bang-bang, then random
/// feasible schedules rescaled to spend the budget.
fn build_starts(problem: &NlpProblem, opts: &SolverOptions) -> Result<Vec<Vec<f64>>> {
    let sys = problem.sys();
    let params = problem.params();
    let grid = problem.grid();
    let n_starts = opts.n_starts.max(1);

    let mut starts = Vec::with_capacity(n_starts);
    let (static_schedule, _) = strategies::static_strategy(sys, params, grid)?;
    starts.push(problem.encode(&static_schedule));
    if starts.len() < n_starts {
        let (bang_schedule, _) = strategies::bang_bang_strategy(sys, params, grid)?;
        starts.push(problem.encode(&bang_schedule));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let hi = problem.upper_bounds();
    while starts.len() < n_starts {
        let mut found = None;
        for _ in 0..8 {
            let raw: Vec<f64> = hi.iter().map(|&h| rng.gen::<f64>() * h).collect();
            if let Some(x) = rescale_to_budget(problem, &raw)? {
                found = Some(x);
                break;
            }
        }
        // A draw that cannot reach the budget by downscaling is replaced by
        // the static start.
        starts.push(found.unwrap_or_else(|| starts[0].clone()));
    }
    Ok(starts)
}

/// Scales a raw schedule by a factor in [0, 1] so that it spends the budget
/// exactly; returns `None` when even the unscaled schedule underspends.
fn rescale_to_budget(problem: &NlpProblem, raw: &[f64]) -> Result<Option<Vec<f64>>> {
    let budget = problem.params().budget;
    let scale_tol = budget.max(1e-12) * strategies::CALIBRATION_TOL;
    if problem.evaluate(raw)?.spend < budget {
        return Ok(None);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let x: Vec<f64> = raw.iter().map(|&c| c * mid).collect();
        let spend = problem.evaluate(&x)?.spend;
        if (spend - budget).abs() <= scale_tol {
            return Ok(Some(x));
        }
        if spend < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Bisection(
        "feasible-start rescaling did not converge".into(),
    ))
}

fn project(x: &mut [f64], hi: &[f64]) {
    for (xi, &h) in x.iter_mut().zip(hi) {
        *xi = xi.clamp(0.0, h);
    }
}

fn projected_gradient_norms(x: &[f64], grad: &[f64], hi: &[f64]) -> (f64, f64) {
    let mut norm2 = 0.0;
    let mut norm_inf: f64 = 0.0;
    for idx in 0..x.len() {
        let step = (x[idx] - grad[idx]).clamp(0.0, hi[idx]) - x[idx];
        norm2 += step * step;
        norm_inf = norm_inf.max(step.abs());
    }
    (norm2.sqrt(), norm_inf)
}

fn augmented_lagrangian(
    problem: &NlpProblem,
    mut x: Vec<f64>,
    opts: &SolverOptions,
) -> Result<StartResult> {
    let hi = problem.upper_bounds();
    let budget_scale = problem.params().budget.max(1e-12);
    let grad_tol = opts.tol_grad * (problem.num_vars() as f64).sqrt();

    let mut multiplier = 0.0f64;
    let mut penalty = 100.0f64;
    let mut total_iterations = 0usize;
    let mut prev_residual: Option<f64> = None;

    project(&mut x, &hi);

    for _outer in 0..opts.max_outer {
        let (iters, inner_converged) = minimize_subproblem(
            problem,
            &mut x,
            &hi,
            multiplier,
            penalty,
            grad_tol,
            opts.max_inner,
        )?;
        total_iterations += iters;

        let eval = problem.evaluate(&x)?;
        let residual = eval.constraint.abs() / budget_scale;
        if residual <= opts.tol_con && inner_converged {
            break;
        }
        multiplier += penalty * eval.constraint;
        // Escalate the penalty when the residual fails to shrink by 4x and
        // is still meaningfully away from the tolerance floor.
        if let Some(prev) = prev_residual {
            if residual > 0.25 * prev && residual > 10.0 * opts.tol_con {
                penalty = (penalty * 10.0).min(1e8);
            }
        }
        prev_residual = Some(residual);
    }

    // Close the last sliver of constraint violation by moving along the
    // spend gradient (spend is monotone in that direction); the step is of
    // order |h|/‖∇h‖² and does not disturb stationarity measurably.
    polish_feasibility(problem, &mut x, &hi, opts)?;
    let eval = problem.evaluate(&x)?;

    // KKT stationarity is measured with the plain Lagrangian gradient.
    let grads = problem.gradient(&x)?;
    let lagrangian_grad: Vec<f64> = grads
        .objective
        .iter()
        .zip(&grads.constraint)
        .map(|(&gj, &gc)| -gj + multiplier * gc)
        .collect();
    let (_, pg_inf) = projected_gradient_norms(&x, &lagrangian_grad, &hi);
    let residual = eval.constraint.abs() / budget_scale;
    let kkt_residual = pg_inf.max(residual);
    let converged = pg_inf <= grad_tol && residual <= opts.tol_con;

    Ok(StartResult {
        objective: eval.objective,
        spend: eval.spend,
        multiplier,
        iterations: total_iterations,
        kkt_residual,
        converged,
        x,
    })
}

/// Drives the spend residual below a tenth of the constraint tolerance by a
/// bisected move along the constraint gradient (projected onto the boxes).
fn polish_feasibility(
    problem: &NlpProblem,
    x: &mut Vec<f64>,
    hi: &[f64],
    opts: &SolverOptions,
) -> Result<()> {
    let scale = problem.params().budget.max(1e-12);
    let tol = 0.1 * opts.tol_con * scale;
    let current = problem.evaluate(x)?.constraint;
    if current.abs() <= tol {
        return Ok(());
    }
    let gc = problem.gradient(x)?.constraint;
    let gnorm2: f64 = gc.iter().map(|g| g * g).sum();
    if gnorm2 <= 0.0 {
        return Ok(());
    }
    let trial_at = |s: f64| -> Result<(Vec<f64>, f64)> {
        let xt: Vec<f64> = x
            .iter()
            .zip(&gc)
            .zip(hi)
            .map(|((&xi, &g), &h)| (xi + s * g).clamp(0.0, h))
            .collect();
        let c = problem.evaluate(&xt)?.constraint;
        Ok((xt, c))
    };

    // Bracket the root in s, expanding from a Newton-sized first guess.
    let dir = if current > 0.0 { -1.0 } else { 1.0 };
    let mut lo_s = 0.0f64;
    let mut lo_c = current;
    let mut s = dir * current.abs() / gnorm2;
    let mut hi_s = None;
    for _ in 0..60 {
        let (xt, c) = trial_at(s)?;
        if c.abs() <= tol {
            *x = xt;
            return Ok(());
        }
        if c.signum() != lo_c.signum() {
            hi_s = Some(s);
            break;
        }
        lo_s = s;
        lo_c = c;
        s *= 2.0;
    }
    let Some(mut hi_s) = hi_s else {
        return Ok(()); // boxes block the correction; convergence flag reports it
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo_s + hi_s);
        let (xt, c) = trial_at(mid)?;
        if c.abs() <= tol {
            *x = xt;
            return Ok(());
        }
        if c.signum() == lo_c.signum() {
            lo_s = mid;
            lo_c = c;
        } else {
            hi_s = mid;
        }
    }
    Ok(())
}

/// Minimizes the augmented Lagrangian over the boxes from `x` in place.
/// Returns the iteration count and whether the gradient tolerance was met.
fn minimize_subproblem(
    problem: &NlpProblem,
    x: &mut Vec<f64>,
    hi: &[f64],
    multiplier: f64,
    penalty: f64,
    grad_tol: f64,
    max_inner: usize,
) -> Result<(usize, bool)> {
    const ARMIJO: f64 = 1e-4;
    const MEMORY: usize = 8;
    const STEP_MIN: f64 = 1e-8;
    const STEP_MAX: f64 = 1e6;

    let merit = |problem: &NlpProblem, x: &[f64]| -> Result<(f64, f64)> {
        let eval = problem.evaluate(x)?;
        let value =
            -eval.objective + multiplier * eval.constraint + 0.5 * penalty * eval.constraint.powi(2);
        Ok((value, eval.constraint))
    };
    let merit_grad = |problem: &NlpProblem, x: &[f64], constraint: f64| -> Result<Vec<f64>> {
        let grads = problem.gradient(x)?;
        Ok(grads
            .objective
            .iter()
            .zip(&grads.constraint)
            .map(|(&gj, &gc)| -gj + (multiplier + penalty * constraint) * gc)
            .collect())
    };

    let (mut f_val, mut constraint) = merit(problem, x)?;
    let mut grad = merit_grad(problem, x, constraint)?;
    let mut recent = [f_val; MEMORY];
    let mut step = 1.0f64;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    for iter in 0..max_inner {
        let (pg2, _) = projected_gradient_norms(x, &grad, hi);
        if pg2 <= grad_tol {
            return Ok((iter, true));
        }

        // Barzilai-Borwein step from the previous pair, safeguarded.
        if let Some((x_prev, g_prev)) = &prev {
            let mut sy = 0.0;
            let mut ss = 0.0;
            for idx in 0..x.len() {
                let s = x[idx] - x_prev[idx];
                let y = grad[idx] - g_prev[idx];
                sy += s * y;
                ss += s * s;
            }
            step = if sy > 1e-16 {
                (ss / sy).clamp(STEP_MIN, STEP_MAX)
            } else {
                STEP_MAX
            };
        }

        let f_ref = recent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = false;
        let mut trial = vec![0.0; x.len()];
        for _ in 0..50 {
            for idx in 0..x.len() {
                trial[idx] = (x[idx] - step * grad[idx]).clamp(0.0, hi[idx]);
            }
            let dir_deriv: f64 = grad
                .iter()
                .zip(trial.iter().zip(x.iter()))
                .map(|(&g, (&t, &xc))| g * (t - xc))
                .sum();
            let (f_trial, c_trial) = merit(problem, &trial)?;
            if f_trial <= f_ref + ARMIJO * dir_deriv || dir_deriv.abs() < 1e-18 {
                prev = Some((x.clone(), grad.clone()));
                *x = trial.clone();
                f_val = f_trial;
                constraint = c_trial;
                grad = merit_grad(problem, x, constraint)?;
                recent.rotate_left(1);
                *recent.last_mut().unwrap() = f_val;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Line search stalled at numerical precision.
            return Ok((iter, projected_gradient_norms(x, &grad, hi).0 <= grad_tol));
        }
    }
    let done = projected_gradient_norms(x, &grad, hi).0 <= grad_tol;
    Ok((max_inner, done))
}

/// Per-group, per-grid-point resource consumption of a schedule, split into
/// direct and word-of-mouth rates, plus their right-endpoint integrals.
#[derive(Debug, Clone)]
pub struct ResourceRates {
    pub times: Vec<f64>,
    /// Direct rate `g_m b̂_m u_m(t_n)²`, indexed `[m][n]`.
    pub direct: Vec<Vec<f64>>,
    /// Word-of-mouth rate `α v_m β(t_n) d ĉ_m v_m² ī_m s̄`, indexed `[m][n]`.
    pub wom: Vec<Vec<f64>>,
    /// Integrated direct spend per group.
    pub direct_integrated: Vec<f64>,
    /// Integrated word-of-mouth spend per group.
    pub wom_integrated: Vec<f64>,
}

impl ResourceRates {
    pub fn total_integrated(&self) -> f64 {
        self.direct_integrated.iter().sum::<f64>() + self.wom_integrated.iter().sum::<f64>()
    }

    /// Fraction of the total spend used by each group (direct + WOM).
    pub fn group_shares(&self) -> Vec<f64> {
        let total = self.total_integrated();
        self.direct_integrated
            .iter()
            .zip(&self.wom_integrated)
            .map(|(&d, &w)| (d + w) / total)
            .collect()
    }

    /// Fraction of the total spend used by word-of-mouth incentives.
    pub fn wom_share(&self) -> f64 {
        self.wom_integrated.iter().sum::<f64>() / self.total_integrated()
    }
}

/// Resource allocation rates of a schedule along its trajectory.
pub fn resource_allocation_rates(
    sys: &MeanFieldSystem,
    params: &ModelParams,
    schedule: &ControlSchedule,
    traj: &Trajectory,
) -> ResourceRates {
    let grid = schedule.grid;
    let num_groups = sys.num_groups();
    let dt = grid.dt();
    let mut direct = vec![vec![0.0; grid.num_points()]; num_groups];
    let mut wom = vec![vec![0.0; grid.num_points()]; num_groups];
    let mut direct_integrated = vec![0.0; num_groups];
    let mut wom_integrated = vec![0.0; num_groups];
    for n in 0..grid.num_points() {
        let (d_rates, w_rates) = crate::dynamics::spend_rates_at(sys, params, schedule, traj, n);
        for m in 0..num_groups {
            direct[m][n] = d_rates[m];
            wom[m][n] = w_rates[m];
            if n >= 1 {
                direct_integrated[m] += d_rates[m] * dt;
                wom_integrated[m] += w_rates[m] * dt;
            }
        }
    }
    ResourceRates {
        times: grid.times(),
        direct,
        wom,
        direct_integrated,
        wom_integrated,
    }
}
