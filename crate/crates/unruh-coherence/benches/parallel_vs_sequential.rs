//! Compares the rayon-backed partial trace against the sequential fallback
//! on the workloads that dominate real runs, plus the full pipeline at a
//! sweep-sized scenario. Both paths produce bit-identical matrices; the
//! interesting number is the wall-clock ratio as group counts grow.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, SamplingMode};

use unruh_coherence::coherence::evaluate_numeric;
use unruh_coherence::density::{reduce, reduce_seq};
use unruh_coherence::registry::PureState;
use unruh_coherence::rindler::{AccelerationSpec, TruncationPolicy};
use unruh_coherence::states::{build, StateFamily, StateSpec};

fn accelerated_state(family: StateFamily, parties: &[usize], r: f64, n_max: u32) -> PureState {
    let spec = StateSpec::new(
        family,
        parties
            .iter()
            .map(|&p| (p, AccelerationSpec::from_r(r).unwrap()))
            .collect(),
        TruncationPolicy::FixedNMax(n_max),
    )
    .unwrap();
    build(&spec).unwrap().state
}

fn visible_modes(state: &PureState) -> Vec<usize> {
    state
        .registry()
        .modes()
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.role.is_region_ii())
        .map(|(i, _)| i)
        .collect()
}

fn bench_partial_trace(c: &mut Criterion) {
    let pi = std::f64::consts::PI;
    let cases: Vec<(&str, PureState)> = vec![
        (
            "ghz_two_accel_120",
            accelerated_state(
                StateFamily::GeneralizedGhz { theta: pi / 4.0 },
                &[1, 2],
                1.6,
                120,
            ),
        ),
        (
            "ghz_two_accel_240",
            accelerated_state(
                StateFamily::GeneralizedGhz { theta: pi / 4.0 },
                &[1, 2],
                1.6,
                240,
            ),
        ),
        (
            "wwbar_two_accel_110",
            accelerated_state(StateFamily::WWbar, &[1, 2], 1.6, 110),
        ),
    ];
    let mut group = c.benchmark_group("partial_trace");
    group.sample_size(10).sampling_mode(SamplingMode::Flat);
    for (name, state) in &cases {
        let keep = visible_modes(state);
        group.bench_with_input(BenchmarkId::new("parallel", name), state, |b, st| {
            b.iter(|| reduce(st, &keep).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", name), state, |b, st| {
            b.iter(|| reduce_seq(st, &keep).unwrap())
        });
    }
    group.finish();
}

fn bench_full_pipeline(c: &mut Criterion) {
    let spec = StateSpec::new(
        StateFamily::WWbar,
        [(1usize, 1.8f64), (2, 1.8)]
            .into_iter()
            .map(|(p, r)| (p, AccelerationSpec::from_r(r).unwrap()))
            .collect(),
        TruncationPolicy::FixedNMax(150),
    )
    .unwrap();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10).sampling_mode(SamplingMode::Flat);
    group.bench_function("wwbar_two_accel_150", |b| {
        b.iter(|| evaluate_numeric(&spec).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_partial_trace, bench_full_pipeline);
criterion_main!(benches);
