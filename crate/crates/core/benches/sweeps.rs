use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use stabsim::adversary::{enumerate_prefixes, sample_pattern, AdversarySpec, LossyRunLaw};
use stabsim::graphs::CommGraph;
use stabsim::protocols::{MinMax, Rounding};
use stabsim::sweep::{map_sequential, par_map};
use stabsim::tasks::stabilization_report;
use stabsim::views::Run;

fn ll_jobs() -> Vec<(Vec<CommGraph>, [i64; 2])> {
    let prefixes: Vec<Vec<CommGraph>> = enumerate_prefixes(&AdversarySpec::ll(), 7)
        .unwrap()
        .collect();
    let mut jobs = Vec::new();
    for p in prefixes {
        for inputs in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            jobs.push((p.clone(), inputs));
        }
    }
    jobs
}

fn ll_job((prefix, inputs): (Vec<CommGraph>, [i64; 2])) -> bool {
    let run = Run::from_prefix(inputs.to_vec(), &prefix).unwrap();
    stabilization_report(&run, &MinMax::plain(), prefix.len() as u64, 2)
        .unwrap()
        .solved()
}

fn bliis_job(seed: u64) -> bool {
    let spec = AdversarySpec::bliis(3, 1, 2).unwrap();
    let prefix = sample_pattern(&spec, seed, 200, LossyRunLaw::default()).unwrap();
    let inputs = vec![
        (seed % 3) as i64,
        ((seed / 3) % 3) as i64,
        ((seed / 9) % 3) as i64,
    ];
    let run = Run::from_prefix(inputs, &prefix).unwrap();
    stabilization_report(&run, &MinMax::growing(Rounding::Floor), 200, 10)
        .unwrap()
        .solved()
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("ll_enumeration");
    group.sample_size(10);
    let jobs = ll_jobs();
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(map_sequential(jobs.clone(), ll_job)))
    });
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(par_map(jobs.clone(), ll_job)))
    });
    group.finish();

    let mut group = c.benchmark_group("bliis_seed_sweep");
    group.sample_size(10);
    let seeds: Vec<u64> = (0..64).collect();
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(map_sequential(seeds.clone(), bliis_job)))
    });
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(par_map(seeds.clone(), bliis_job)))
    });
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
