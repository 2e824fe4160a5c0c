#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptc::instance::{Family, Instance};
use ptc::relaxation::JobGroup;

/// Small random instance with thresholds tight enough to make some draws
/// infeasible.
pub fn random_instance(seed: u64, max_jobs: usize, max_machines: usize, max_families: usize) -> Instance<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let machines = rng.gen_range(1..=max_machines);
    let jobs = rng.gen_range(1..=max_jobs);
    let families = rng.gen_range(1..=max_families.min(jobs));
    let mut counts = vec![1usize; families];
    for _ in families..jobs {
        counts[rng.gen_range(0..families)] += 1;
    }
    let fams = counts
        .into_iter()
        .map(|n| {
            let mut qualified: Vec<usize> = (0..machines).filter(|_| rng.gen_bool(0.7)).collect();
            if qualified.is_empty() {
                qualified.push(rng.gen_range(0..machines));
            }
            Family::new(n, rng.gen_range(1..=6), rng.gen_range(0..=4), rng.gen_range(4..=25), qualified)
        })
        .collect();
    Instance::new(machines, fams)
}

/// Random job multiset with at most `max_jobs` jobs over at most
/// `max_families` families.
pub fn random_groups(rng: &mut ChaCha8Rng, max_jobs: usize, max_families: usize) -> Vec<JobGroup<i64>> {
    let families = rng.gen_range(1..=max_families);
    let mut left = rng.gen_range(families..=max_jobs.max(families));
    let mut out = Vec::new();
    for f in 0..families {
        let n = if f + 1 == families { left } else { rng.gen_range(1..=left - (families - f - 1)) };
        left -= n;
        out.push(JobGroup::family(f, n, rng.gen_range(1..=12), rng.gen_range(0..=10)));
    }
    out
}

/// Random per-machine sequences covering every job on qualified machines.
pub fn random_sequences(inst: &Instance<i64>, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut seqs = vec![Vec::new(); inst.machines];
    for (f, fam) in inst.families.iter().enumerate() {
        for _ in 0..fam.jobs {
            let m = fam.qualified[rng.gen_range(0..fam.qualified.len())];
            let at = rng.gen_range(0..=seqs[m].len());
            seqs[m].insert(at, f);
        }
    }
    seqs
}
