//! Parallel vs sequential throughput of the data-parallel entry points:
//! Monte Carlo ensembles and solver multi-starts.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use campaign_core::degree::{DegreeDistribution, GroupPartition};
use campaign_core::dynamics::{ControlSchedule, MeanFieldSystem, ModelParams, TimeGrid};
use campaign_core::exec::ExecMode;
use campaign_core::netsim::{ensemble, EnsembleSpec};
use campaign_core::solver::{solve_with_mode, SolverOptions};
use campaign_core::transcribe::NlpProblem;

fn bench_ensemble(c: &mut Criterion) {
    let dist = DegreeDistribution::truncated_poisson(23.60, 1, 60).unwrap();
    let part = GroupPartition::equal_mass(&dist, 3).unwrap();
    let mut params = ModelParams::baseline(3);
    params.alpha = 1.0;
    params.v_max = 0.0;
    let grid = TimeGrid::new(1.0, 50).unwrap();
    let schedule = ControlSchedule::zeros(3, grid);
    let spec = EnsembleSpec {
        n_nodes: 4000,
        n_runs: 8,
        dt: 0.02,
    };

    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    for (label, mode) in [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| ensemble(&dist, &part, &params, &schedule, &spec, 7, mode).unwrap());
        });
    }
    group.finish();
}

fn bench_multistart_solve(c: &mut Criterion) {
    let dist = DegreeDistribution::truncated_poisson(23.60, 1, 60).unwrap();
    let part = GroupPartition::equal_mass(&dist, 2).unwrap();
    let sys = MeanFieldSystem::new(dist, part).unwrap();
    let params = ModelParams::baseline(2);
    let grid = TimeGrid::new(1.0, 25).unwrap();
    let problem = NlpProblem::new(&sys, &params, grid);
    let opts = SolverOptions {
        max_inner: 300,
        n_starts: 4,
        ..SolverOptions::default()
    };

    let mut group = c.benchmark_group("multistart_solve");
    group.sample_size(10);
    for (label, mode) in [
        ("sequential", ExecMode::Sequential),
        ("parallel", ExecMode::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| solve_with_mode(&problem, &opts, mode).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_ensemble, bench_multistart_solve);
criterion_main!(benches);
