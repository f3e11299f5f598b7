//! Orchestration of the four subcommands: solve, baseline, sweep, validate.

use anyhow::{anyhow, bail};
use serde_json::json;
use std::time::Instant;

use campaign_core::dynamics::{
    budget_spend, integrate_heun, objective, ControlSchedule, Trajectory,
};
use campaign_core::exec::ExecMode;
use campaign_core::export;
use campaign_core::netsim::{ensemble, EnsembleSpec};
use campaign_core::solver::{resource_allocation_rates, solve, OptimalSolution};
use campaign_core::strategies;
use campaign_core::transcribe::NlpProblem;

use crate::config::Scenario;
use crate::output::{output_dir, write_atomic};

/// Exit code signalling that artifacts were written but the solver stopped
/// on its iteration caps.
pub const EXIT_UNCONVERGED: i32 = 4;

enum StrategyRun {
    None,
    Static { kappa: f64 },
    BangBang { tau: f64 },
    Optimal { solution: OptimalSolution },
}

fn schedule_for_strategy(scenario: &Scenario) -> anyhow::Result<(ControlSchedule, StrategyRun)> {
    let sys = &scenario.sys;
    let params = &scenario.params;
    let grid = scenario.grid;
    match scenario.config.model.strategy.as_str() {
        "none" => Ok((
            strategies::no_control(sys.num_groups(), grid),
            StrategyRun::None,
        )),
        "static" => {
            let (schedule, kappa) = strategies::static_strategy(sys, params, grid)?;
            Ok((schedule, StrategyRun::Static { kappa }))
        }
        "bang_bang" => {
            let (schedule, tau) = strategies::bang_bang_strategy(sys, params, grid)?;
            Ok((schedule, StrategyRun::BangBang { tau }))
        }
        "optimal" => {
            let problem = NlpProblem::new(sys, params, grid);
            let solution = solve(&problem, &scenario.config.solver.to_options())?;
            Ok((solution.schedule.clone(), StrategyRun::Optimal { solution }))
        }
        other => bail!("unknown strategy {other:?}"),
    }
}

/// Degrees highlighted in trajectory.csv: configured list, or k_min, each
/// group's rounded mean degree and k_max.
fn selected_degrees(scenario: &Scenario) -> Vec<usize> {
    let configured = &scenario.config.output.trajectory_degrees;
    let dist = scenario.sys.dist();
    let mut degrees: Vec<usize> = if configured.is_empty() {
        let mut auto = vec![dist.k_min(), dist.k_max()];
        for &mean in scenario.sys.partition().group_mean_degrees() {
            auto.push(mean.round() as usize);
        }
        auto
    } else {
        configured.clone()
    };
    degrees.retain(|&k| k >= dist.k_min() && k <= dist.k_max());
    degrees.sort_unstable();
    degrees.dedup();
    degrees
}

fn uncontrolled_objective(scenario: &Scenario) -> anyhow::Result<f64> {
    let schedule = strategies::no_control(scenario.sys.num_groups(), scenario.grid);
    let traj = integrate_heun(&scenario.sys, &scenario.params, &schedule)?;
    Ok(objective(&scenario.sys, &traj))
}

fn scenario_block(scenario: &Scenario) -> serde_json::Value {
    json!({
        "network": scenario.config.network.kind,
        "groups": scenario.config.model.groups,
        "time_points": scenario.config.model.time_points,
        "strategy": scenario.config.model.strategy,
        "seed": scenario.config.seed,
        "budget": scenario.params.budget,
    })
}

/// `solve <config>`: integrate/solve one scenario and write its artifacts.
pub fn run_scenario(scenario: &Scenario) -> anyhow::Result<i32> {
    let started = Instant::now();
    let sys = &scenario.sys;
    let params = &scenario.params;
    let dir = output_dir(&scenario.config.output.dir);

    let (schedule, run) = schedule_for_strategy(scenario)?;
    let traj = integrate_heun(sys, params, &schedule)?;
    let spend = budget_spend(sys, params, &schedule, &traj);
    let reward = objective(sys, &traj);

    write_atomic(&dir, "degree_pmf.csv", &export::degree_pmf_csv(sys.dist()))?;
    write_atomic(&dir, "degree_cdf.csv", &export::degree_cdf_csv(sys.dist()))?;
    write_atomic(
        &dir,
        "trajectory.csv",
        &export::trajectory_csv(sys.dist(), &traj, &selected_degrees(scenario)),
    )?;

    let is_controlled = !matches!(run, StrategyRun::None);
    let mut shares = json!(null);
    if is_controlled {
        write_atomic(&dir, "schedule.csv", &export::schedule_csv(&schedule))?;
        let rates = resource_allocation_rates(sys, params, &schedule, &traj);
        write_atomic(&dir, "resource_rates.csv", &export::resource_rates_csv(&rates))?;
        shares = json!({
            "direct": rates.direct_integrated,
            "wom": rates.wom_integrated,
            "total": rates.group_shares(),
            "wom_fraction": rates.wom_share(),
        });
    }

    let strategy_details = match &run {
        StrategyRun::None => json!(null),
        StrategyRun::Static { kappa } => json!({ "kappa": kappa }),
        StrategyRun::BangBang { tau } => json!({ "tau": tau }),
        StrategyRun::Optimal { solution } => json!({
            "multiplier": solution.multiplier,
            "iterations": solution.iterations,
            "kkt_residual": solution.kkt_residual,
            "converged": solution.converged,
        }),
    };
    let summary = json!({
        "scenario": scenario_block(scenario),
        "objective": reward,
        "uncontrolled_objective": uncontrolled_objective(scenario)?,
        "spend": spend,
        "budget": params.budget,
        "spend_residual_rel": (spend - params.budget).abs() / params.budget.max(1e-12),
        "shares": shares,
        "strategy_details": strategy_details,
        "timing_seconds": started.elapsed().as_secs_f64(),
    });
    write_atomic(&dir, "summary.json", &serde_json::to_string_pretty(&summary)?)?;

    if let StrategyRun::Optimal { solution } = &run {
        if !solution.converged {
            eprintln!(
                "solver stopped before convergence (kkt residual {:.3e}); diagnostics written",
                solution.kkt_residual
            );
            return Ok(EXIT_UNCONVERGED);
        }
    }
    Ok(0)
}

/// `baseline <config>`: calibrate the static and bang-bang baselines and
/// write their schedules, trajectories and a comparative summary.
pub fn run_baseline(scenario: &Scenario) -> anyhow::Result<i32> {
    let started = Instant::now();
    let sys = &scenario.sys;
    let params = &scenario.params;
    let grid = scenario.grid;
    let dir = output_dir(&scenario.config.output.dir);
    let degrees = selected_degrees(scenario);

    let none = strategies::no_control(sys.num_groups(), grid);
    let none_traj = integrate_heun(sys, params, &none)?;
    let j_none = objective(sys, &none_traj);
    write_atomic(
        &dir,
        "baseline_none_trajectory.csv",
        &export::trajectory_csv(sys.dist(), &none_traj, &degrees),
    )?;

    let emit = |name: &str, schedule: &ControlSchedule, traj: &Trajectory| -> anyhow::Result<f64> {
        write_atomic(
            &dir,
            &format!("baseline_{name}_schedule.csv"),
            &export::schedule_csv(schedule),
        )?;
        write_atomic(
            &dir,
            &format!("baseline_{name}_trajectory.csv"),
            &export::trajectory_csv(sys.dist(), traj, &degrees),
        )?;
        Ok(budget_spend(sys, params, schedule, traj))
    };

    let (static_schedule, kappa) = strategies::static_strategy(sys, params, grid)?;
    let static_traj = integrate_heun(sys, params, &static_schedule)?;
    let j_static = objective(sys, &static_traj);
    let static_spend = emit("static", &static_schedule, &static_traj)?;

    let (bang_schedule, tau) = strategies::bang_bang_strategy(sys, params, grid)?;
    let bang_traj = integrate_heun(sys, params, &bang_schedule)?;
    let j_bang = objective(sys, &bang_traj);
    let bang_spend = emit("bang_bang", &bang_schedule, &bang_traj)?;

    let summary = json!({
        "scenario": scenario_block(scenario),
        "none": { "objective": j_none },
        "static": {
            "objective": j_static,
            "kappa": kappa,
            "spend": static_spend,
            "spend_residual_rel": (static_spend - params.budget).abs() / params.budget.max(1e-12),
        },
        "bang_bang": {
            "objective": j_bang,
            "tau": tau,
            "spend": bang_spend,
            "spend_residual_rel": (bang_spend - params.budget).abs() / params.budget.max(1e-12),
        },
        "timing_seconds": started.elapsed().as_secs_f64(),
    });
    write_atomic(&dir, "summary.json", &serde_json::to_string_pretty(&summary)?)?;
    Ok(0)
}

struct SweepRow {
    value: f64,
    j_opt: f64,
    j_static: f64,
    j_bang: f64,
    j_none: f64,
    spend_residual_opt: f64,
    spend_residual_static: f64,
    spend_residual_bang: f64,
    iterations: usize,
    kkt_residual: f64,
    converged: bool,
    error: Option<String>,
}

fn sweep_point(scenario: &Scenario, parameter: &str, value: f64) -> anyhow::Result<SweepRow> {
    let sys = &scenario.sys;
    let grid = scenario.grid;
    let mut params = scenario.params.clone();
    match parameter {
        "B" => params.budget = value,
        "d" => params.wom_cost_weight = value,
        "beta" => {
            params.profile = campaign_core::dynamics::SpreadingProfile::Constant { rate: value }
        }
        "b_hat_2" => {
            params.b_hat[1] = value;
            params.c_hat[1] = value;
        }
        "i0" => params.i0 = value,
        other => bail!("unknown sweep parameter {other:?}"),
    }
    params.validate(sys.num_groups())?;

    let none = strategies::no_control(sys.num_groups(), grid);
    let j_none = objective(sys, &integrate_heun(sys, &params, &none)?);

    let (static_schedule, _) = strategies::static_strategy(sys, &params, grid)?;
    let static_traj = integrate_heun(sys, &params, &static_schedule)?;
    let j_static = objective(sys, &static_traj);
    let static_spend = budget_spend(sys, &params, &static_schedule, &static_traj);

    let (bang_schedule, _) = strategies::bang_bang_strategy(sys, &params, grid)?;
    let bang_traj = integrate_heun(sys, &params, &bang_schedule)?;
    let j_bang = objective(sys, &bang_traj);
    let bang_spend = budget_spend(sys, &params, &bang_schedule, &bang_traj);

    let problem = NlpProblem::new(sys, &params, grid);
    let solution = solve(&problem, &scenario.config.solver.to_options())?;

    let scale = params.budget.max(1e-12);
    Ok(SweepRow {
        value,
        j_opt: solution.objective,
        j_static,
        j_bang,
        j_none,
        spend_residual_opt: (solution.spend - params.budget).abs() / scale,
        spend_residual_static: (static_spend - params.budget).abs() / scale,
        spend_residual_bang: (bang_spend - params.budget).abs() / scale,
        iterations: solution.iterations,
        kkt_residual: solution.kkt_residual,
        converged: solution.converged,
        error: None,
    })
}

/// `sweep <config>`: one row per sweep value; per-point failures are
/// recorded in the row and the sweep continues.
pub fn run_sweep(scenario: &Scenario) -> anyhow::Result<i32> {
    let sweep = scenario
        .config
        .sweep
        .clone()
        .ok_or_else(|| anyhow!("config has no [sweep] section"))?;
    let dir = output_dir(&scenario.config.output.dir);

    let rows: Vec<SweepRow> = campaign_core::exec::run_indexed(
        ExecMode::default(),
        sweep.values.len(),
        |idx| {
            let value = sweep.values[idx];
            sweep_point(scenario, &sweep.parameter, value).unwrap_or_else(|err| SweepRow {
                value,
                j_opt: f64::NAN,
                j_static: f64::NAN,
                j_bang: f64::NAN,
                j_none: f64::NAN,
                spend_residual_opt: f64::NAN,
                spend_residual_static: f64::NAN,
                spend_residual_bang: f64::NAN,
                iterations: 0,
                kkt_residual: f64::NAN,
                converged: false,
                error: Some(err.to_string().replace(',', ";")),
            })
        },
    );

    let mut csv = String::from(
        "parameter,value,J_opt,J_static,J_bang,J_none,impr_vs_static_pct,impr_vs_bang_pct,\
         spend_residual_opt,spend_residual_static,spend_residual_bang,iterations,kkt_residual,converged,error\n",
    );
    for row in &rows {
        let impr_static = 100.0 * (row.j_opt - row.j_static) / row.j_static;
        let impr_bang = 100.0 * (row.j_opt - row.j_bang) / row.j_bang;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            sweep.parameter,
            export::fmt(row.value),
            export::fmt(row.j_opt),
            export::fmt(row.j_static),
            export::fmt(row.j_bang),
            export::fmt(row.j_none),
            export::fmt(impr_static),
            export::fmt(impr_bang),
            export::fmt(row.spend_residual_opt),
            export::fmt(row.spend_residual_static),
            export::fmt(row.spend_residual_bang),
            row.iterations,
            export::fmt(row.kkt_residual),
            row.converged,
            row.error.as_deref().unwrap_or("")
        ));
    }
    write_atomic(&dir, "sweep.csv", &csv)?;

    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} sweep points failed; see sweep.csv", rows.len());
    }
    Ok(0)
}

/// `validate <config>`: ensemble-vs-mean-field comparison on one schedule.
pub fn run_validation(scenario: &Scenario) -> anyhow::Result<i32> {
    let started = Instant::now();
    let sys = &scenario.sys;
    let params = &scenario.params;
    let grid = scenario.grid;
    let dir = output_dir(&scenario.config.output.dir);

    let (schedule, _) = schedule_for_strategy(scenario)?;
    let traj = integrate_heun(sys, params, &schedule)?;

    let dt = scenario.config.validation.dt.unwrap_or(grid.dt());
    let spec = EnsembleSpec {
        n_nodes: scenario.config.validation.n_nodes,
        n_runs: scenario.config.validation.n_runs,
        dt,
    };
    let result = ensemble(
        sys.dist(),
        sys.partition(),
        params,
        &schedule,
        &spec,
        scenario.config.seed,
        ExecMode::default(),
    )?;

    // Compare at the control grid points shared by both time axes.
    let stride = ((grid.dt() / dt).round() as usize).max(1);
    let mut grid_ensemble = campaign_core::netsim::EnsembleResult {
        times: Vec::new(),
        mean: Vec::new(),
        std: Vec::new(),
    };
    for n in 0..grid.num_points() {
        let idx = (n * stride).min(result.times.len() - 1);
        grid_ensemble.times.push(grid.time(n));
        grid_ensemble.mean.push(result.mean[idx]);
        grid_ensemble.std.push(result.std[idx]);
    }
    let sup_norm = grid_ensemble
        .mean
        .iter()
        .zip(&traj.total_infected)
        .map(|(&sim, &mf)| (sim - mf).abs())
        .fold(0.0f64, f64::max);

    write_atomic(
        &dir,
        "validation.csv",
        &export::validation_csv(&grid_ensemble, &traj.total_infected),
    )?;
    let summary = json!({
        "scenario": scenario_block(scenario),
        "n_nodes": spec.n_nodes,
        "n_runs": spec.n_runs,
        "dt": dt,
        "sup_norm_deviation": sup_norm,
        "final_mean_infected": grid_ensemble.mean.last(),
        "final_meanfield_infected": traj.total_infected.last(),
        "timing_seconds": started.elapsed().as_secs_f64(),
    });
    write_atomic(&dir, "summary.json", &serde_json::to_string_pretty(&summary)?)?;
    println!("sup-norm deviation between ensemble mean and mean-field: {sup_norm:.5}");
    Ok(0)
}
