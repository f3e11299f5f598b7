//! Baseline control schedules: no-control, budget-matched static, and
//! budget-matched bang-bang.
//!
//! Both calibrations re-integrate the dynamics per candidate because the
//! word-of-mouth cost depends on the trajectory; spend is monotone in the
//! calibration scalar, so bisection applies.

use crate::dynamics::{
    budget_spend, integrate_heun, ControlSchedule, MeanFieldSystem, ModelParams, TimeGrid,
};
use crate::{Error, Result};

/// Relative budget-matching tolerance for calibrated baselines.
pub const CALIBRATION_TOL: f64 = 1e-8;
const MAX_BISECTION_ITERS: usize = 200;

/// The all-zero "no campaigning" schedule.
pub fn no_control(num_groups: usize, grid: TimeGrid) -> ControlSchedule {
    ControlSchedule::zeros(num_groups, grid)
}

fn spend_of(sys: &MeanFieldSystem, params: &ModelParams, schedule: &ControlSchedule) -> Result<f64> {
    let traj = integrate_heun(sys, params, schedule)?;
    Ok(budget_spend(sys, params, schedule, &traj))
}

fn check_feasible(sys: &MeanFieldSystem, params: &ModelParams, grid: TimeGrid) -> Result<f64> {
    let full = ControlSchedule::constant(sys.num_groups(), grid, params.u_max, params.v_max);
    let full_spend = spend_of(sys, params, &full)?;
    if params.budget > full_spend {
        return Err(Error::InfeasibleBudget {
            budget: params.budget,
            full_spend,
        });
    }
    Ok(full_spend)
}

/// Bisects `x` in `[0, hi]` until the schedule built by `make` spends the
/// budget to within [`CALIBRATION_TOL`] relative.
fn calibrate<F>(
    sys: &MeanFieldSystem,
    params: &ModelParams,
    hi: f64,
    make: F,
) -> Result<(ControlSchedule, f64)>
where
    F: Fn(f64) -> ControlSchedule,
{
    let target = params.budget;
    let scale = target.max(1e-12);
    let mut lo_x = 0.0;
    let mut hi_x = hi;
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo_x + hi_x);
        let schedule = make(mid);
        let spend = spend_of(sys, params, &schedule)?;
        if (spend - target).abs() <= CALIBRATION_TOL * scale {
            return Ok((schedule, mid));
        }
        if spend < target {
            lo_x = mid;
        } else {
            hi_x = mid;
        }
    }
    Err(Error::Bisection(format!(
        "calibration did not reach |spend - B| <= {CALIBRATION_TOL} * {scale} in {MAX_BISECTION_ITERS} iterations"
    )))
}

/// Constant controls `u ≡ κ u_max`, `v ≡ κ v_max` with κ calibrated so the
/// schedule spends exactly the budget. Returns the schedule and κ.
pub fn static_strategy(
    sys: &MeanFieldSystem,
    params: &ModelParams,
    grid: TimeGrid,
) -> Result<(ControlSchedule, f64)> {
    let num_groups = sys.num_groups();
    let full_spend = check_feasible(sys, params, grid)?;
    if params.budget == 0.0 {
        return Ok((ControlSchedule::zeros(num_groups, grid), 0.0));
    }
    if params.budget == full_spend {
        return Ok((
            ControlSchedule::constant(num_groups, grid, params.u_max, params.v_max),
            1.0,
        ));
    }
    calibrate(sys, params, 1.0, |kappa| {
        ControlSchedule::constant(num_groups, grid, kappa * params.u_max, kappa * params.v_max)
    })
}

/// Builds the bang-bang schedule that switches off at `tau`.
///
/// Grid points with `t_n ≤ ⌊τ/Δt⌋·Δt` run at full intensity. The sample in
/// the interval straddled by τ is set to `√θ` times the maximum, where θ is
/// the covered fraction of that interval; the quadratic direct cost of the
/// interval then scales linearly with θ and the total spend is continuous
/// (and, for v ≡ 0, exactly `u_max²·τ`).
pub fn bang_bang_schedule(
    num_groups: usize,
    grid: TimeGrid,
    u_max: f64,
    v_max: f64,
    tau: f64,
) -> ControlSchedule {
    let mut schedule = ControlSchedule::zeros(num_groups, grid);
    let dt = grid.dt();
    let full = (tau / dt).floor() as usize;
    let theta = (tau - full as f64 * dt) / dt;
    for n in 0..grid.num_points() {
        let (u_val, v_val) = if n <= full {
            (u_max, v_max)
        } else if n == full + 1 && theta > 0.0 {
            let s = theta.sqrt();
            (u_max * s, v_max * s)
        } else {
            (0.0, 0.0)
        };
        for m in 0..num_groups {
            schedule.u[m][n] = u_val;
            schedule.v[m][n] = v_val;
        }
    }
    schedule
}

/// Full-intensity controls until the budget runs out at the switch time τ,
/// calibrated by bisection. Returns the schedule and τ.
pub fn bang_bang_strategy(
    sys: &MeanFieldSystem,
    params: &ModelParams,
    grid: TimeGrid,
) -> Result<(ControlSchedule, f64)> {
    let num_groups = sys.num_groups();
    let full_spend = check_feasible(sys, params, grid)?;
    if params.budget == 0.0 {
        return Ok((ControlSchedule::zeros(num_groups, grid), 0.0));
    }
    if params.budget == full_spend {
        return Ok((
            bang_bang_schedule(num_groups, grid, params.u_max, params.v_max, grid.horizon()),
            grid.horizon(),
        ));
    }
    calibrate(sys, params, grid.horizon(), |tau| {
        bang_bang_schedule(num_groups, grid, params.u_max, params.v_max, tau)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::{DegreeDistribution, GroupPartition};
    use crate::dynamics::objective;

    fn system(kind: &str, groups: usize) -> MeanFieldSystem {
        let dist = match kind {
            "ER" => DegreeDistribution::truncated_poisson(23.60, 1, 60).unwrap(),
            "PL2" => DegreeDistribution::power_law(2.0, 6, 300).unwrap(),
            _ => DegreeDistribution::power_law(3.0, 13, 300).unwrap(),
        };
        let part = GroupPartition::equal_mass(&dist, groups).unwrap();
        MeanFieldSystem::new(dist, part).unwrap()
    }

    fn grid() -> TimeGrid {
        TimeGrid::new(1.0, 50).unwrap()
    }

    #[test]
    fn no_control_is_zero_and_free() {
        let sys = system("ER", 3);
        let params = ModelParams::baseline(3);
        let schedule = no_control(3, grid());
        assert!(schedule.u.iter().flatten().all(|&x| x == 0.0));
        assert!(schedule.v.iter().flatten().all(|&x| x == 0.0));
        let traj = integrate_heun(&sys, &params, &schedule).unwrap();
        assert_eq!(budget_spend(&sys, &params, &schedule, &traj), 0.0);
        assert!((objective(&sys, &traj) - 0.040).abs() < 0.002);
    }

    #[test]
    fn static_kappa_closed_form_without_wom() {
        let sys = system("ER", 3);
        let mut params = ModelParams::baseline(3);
        params.v_max = 0.0;
        let (schedule, kappa) = static_strategy(&sys, &params, grid()).unwrap();
        // spend = κ²·u_max²·T, so κ = sqrt(B / (u_max² T)) = sqrt(1/8)
        let expected = (1.0f64 / 8.0).sqrt();
        assert!(
            (kappa - expected).abs() < 1e-6,
            "kappa {kappa} vs {expected}"
        );
        assert!(schedule.within_bounds(params.u_max, params.v_max, 0.0));
    }

    #[test]
    fn bang_bang_tau_closed_form_without_wom() {
        let sys = system("ER", 3);
        let mut params = ModelParams::baseline(3);
        params.v_max = 0.0;
        let (schedule, tau) = bang_bang_strategy(&sys, &params, grid()).unwrap();
        // spend = u_max²·τ, so τ = B/u_max² = T/8
        assert!((tau - 0.125).abs() < 1e-6, "tau {tau}");
        assert!(schedule.within_bounds(params.u_max, params.v_max, 0.0));
    }

    #[test]
    fn zero_budget_yields_zero_schedules() {
        let sys = system("PL3", 3);
        let mut params = ModelParams::baseline(3);
        params.budget = 0.0;
        let (s, kappa) = static_strategy(&sys, &params, grid()).unwrap();
        assert_eq!(kappa, 0.0);
        assert!(s.u.iter().flatten().all(|&x| x == 0.0));
        let (s, tau) = bang_bang_strategy(&sys, &params, grid()).unwrap();
        assert_eq!(tau, 0.0);
        assert!(s.v.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn calibrations_meet_budget_with_wom() {
        for kind in ["ER", "PL3", "PL2"] {
            let sys = system(kind, 3);
            let params = ModelParams::baseline(3);
            for (schedule, _) in [
                static_strategy(&sys, &params, grid()).unwrap(),
                bang_bang_strategy(&sys, &params, grid()).unwrap(),
            ] {
                let traj = integrate_heun(&sys, &params, &schedule).unwrap();
                let spend = budget_spend(&sys, &params, &schedule, &traj);
                let rel = (spend - params.budget).abs() / params.budget;
                assert!(rel <= CALIBRATION_TOL, "{kind}: relative gap {rel}");
            }
        }
    }

    #[test]
    fn infeasible_budget_is_rejected() {
        let sys = system("ER", 3);
        let mut params = ModelParams::baseline(3);
        params.budget = 1.0; // far beyond full-intensity spend
        assert!(matches!(
            static_strategy(&sys, &params, grid()),
            Err(Error::InfeasibleBudget { .. })
        ));
        assert!(matches!(
            bang_bang_strategy(&sys, &params, grid()),
            Err(Error::InfeasibleBudget { .. })
        ));
    }

    #[test]
    fn full_budget_saturates_the_horizon() {
        let sys = system("ER", 2);
        let mut params = ModelParams::baseline(2);
        let full = ControlSchedule::constant(2, grid(), params.u_max, params.v_max);
        let traj = integrate_heun(&sys, &params, &full).unwrap();
        params.budget = budget_spend(&sys, &params, &full, &traj);
        let (_, tau) = bang_bang_strategy(&sys, &params, grid()).unwrap();
        assert_eq!(tau, 1.0);
        let (_, kappa) = static_strategy(&sys, &params, grid()).unwrap();
        assert_eq!(kappa, 1.0);
    }

    #[test]
    fn calibration_scalars_are_monotone_in_budget() {
        let sys = system("PL2", 3);
        let base = ModelParams::baseline(3);
        let mut last_kappa = -1.0;
        let mut last_tau = -1.0;
        for factor in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let mut params = base.clone();
            params.budget = base.budget * factor;
            let (_, kappa) = static_strategy(&sys, &params, grid()).unwrap();
            let (_, tau) = bang_bang_strategy(&sys, &params, grid()).unwrap();
            assert!(kappa >= last_kappa);
            assert!(tau >= last_tau);
            last_kappa = kappa;
            last_tau = tau;
        }
    }

    #[test]
    fn static_beats_bang_bang_on_defaults() {
        for kind in ["ER", "PL3", "PL2"] {
            let sys = system(kind, 3);
            let params = ModelParams::baseline(3);
            let (s, _) = static_strategy(&sys, &params, grid()).unwrap();
            let (b, _) = bang_bang_strategy(&sys, &params, grid()).unwrap();
            let j_static = objective(&sys, &integrate_heun(&sys, &params, &s).unwrap());
            let j_bang = objective(&sys, &integrate_heun(&sys, &params, &b).unwrap());
            assert!(
                j_static >= j_bang,
                "{kind}: static {j_static} vs bang-bang {j_bang}"
            );
        }
    }
}
