//! Figure-ready CSV renderings of library results.
//!
//! All numeric cells use 17 significant digits so that re-running a scenario
//! with the same seed reproduces byte-identical files.

use crate::degree::DegreeDistribution;
use crate::dynamics::{ControlSchedule, Trajectory};
use crate::netsim::EnsembleResult;
use crate::solver::ResourceRates;

/// Full-precision rendering used by every CSV cell.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Two-column pmf table `(degree, probability)`.
pub fn degree_pmf_csv(dist: &DegreeDistribution) -> String {
    let mut out = String::from("degree,probability\n");
    for (k, &p) in dist.degrees().zip(dist.pmf()) {
        out.push_str(&format!("{k},{}\n", fmt(p)));
    }
    out
}

/// Two-column cumulative pmf table `(degree, probability)`.
pub fn degree_cdf_csv(dist: &DegreeDistribution) -> String {
    let mut out = String::from("degree,probability\n");
    for (k, c) in dist.degrees().zip(dist.cumulative()) {
        out.push_str(&format!("{k},{}\n", fmt(c)));
    }
    out
}

/// Control table `(t, u_1..u_M, v_1..v_M)`.
pub fn schedule_csv(schedule: &ControlSchedule) -> String {
    let m = schedule.num_groups();
    let mut out = String::from("t");
    for g in 1..=m {
        out.push_str(&format!(",u_{g}"));
    }
    for g in 1..=m {
        out.push_str(&format!(",v_{g}"));
    }
    out.push('\n');
    for n in 0..schedule.grid.num_points() {
        out.push_str(&fmt(schedule.grid.time(n)));
        for g in 0..m {
            out.push(',');
            out.push_str(&fmt(schedule.u[g][n]));
        }
        for g in 0..m {
            out.push(',');
            out.push_str(&fmt(schedule.v[g][n]));
        }
        out.push('\n');
    }
    out
}

/// Trajectory table `(t, i_total, ī_m, s̄, i_k for the selected degrees)`.
pub fn trajectory_csv(
    dist: &DegreeDistribution,
    traj: &Trajectory,
    selected_degrees: &[usize],
) -> String {
    let groups = traj.group_link_infection[0].len();
    let mut out = String::from("t,i_total");
    for g in 1..=groups {
        out.push_str(&format!(",ibar_{g}"));
    }
    out.push_str(",sbar");
    for &k in selected_degrees {
        out.push_str(&format!(",i_k{k}"));
    }
    out.push('\n');
    for n in 0..traj.states.len() {
        out.push_str(&fmt(traj.grid.time(n)));
        out.push(',');
        out.push_str(&fmt(traj.total_infected[n]));
        for g in 0..groups {
            out.push(',');
            out.push_str(&fmt(traj.group_link_infection[n][g]));
        }
        out.push(',');
        out.push_str(&fmt(traj.neighbor_susceptibility[n]));
        for &k in selected_degrees {
            out.push(',');
            out.push_str(&fmt(traj.states[n][k - dist.k_min()]));
        }
        out.push('\n');
    }
    out
}

/// Resource allocation rate table `(t, direct_1..M, wom_1..M)`.
pub fn resource_rates_csv(rates: &ResourceRates) -> String {
    let m = rates.direct.len();
    let mut out = String::from("t");
    for g in 1..=m {
        out.push_str(&format!(",direct_{g}"));
    }
    for g in 1..=m {
        out.push_str(&format!(",wom_{g}"));
    }
    out.push('\n');
    for (n, &t) in rates.times.iter().enumerate() {
        out.push_str(&fmt(t));
        for g in 0..m {
            out.push(',');
            out.push_str(&fmt(rates.direct[g][n]));
        }
        for g in 0..m {
            out.push(',');
            out.push_str(&fmt(rates.wom[g][n]));
        }
        out.push('\n');
    }
    out
}

/// Ensemble-vs-mean-field table `(t, mean_i, std_i, meanfield_i)`.
pub fn validation_csv(ensemble: &EnsembleResult, meanfield: &[f64]) -> String {
    let mut out = String::from("t,mean_i,std_i,meanfield_i\n");
    for (idx, &t) in ensemble.times.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(t),
            fmt(ensemble.mean[idx]),
            fmt(ensemble.std[idx]),
            fmt(meanfield[idx])
        ));
    }
    out
}
