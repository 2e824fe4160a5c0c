//! Exhaustive reference solvers for small inputs.
//!
//! Nothing here reuses the sequencing, packing or evaluation code of the
//! other modules; the point is to check them against plain enumeration.

use thiserror::Error;

use crate::instance::Instance;
use crate::num::Time;
use crate::relaxation::{BlockKey, JobGroup};

/// Default job cap of the enumerations.
pub const DEFAULT_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{jobs} jobs exceed the enumeration cap of {cap}")]
pub struct TooLarge {
    pub jobs: usize,
    pub cap: usize,
}

/// Calls `visit` with every distinct arrangement of a multiset given as
/// per-label counts.
fn for_each_arrangement(counts: &mut [usize], prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if counts.iter().all(|&c| c == 0) {
        visit(prefix);
        return;
    }
    for label in 0..counts.len() {
        if counts[label] == 0 {
            continue;
        }
        counts[label] -= 1;
        prefix.push(label);
        for_each_arrangement(counts, prefix, visit);
        prefix.pop();
        counts[label] += 1;
    }
}

/// Minimum single-machine flow time over every ordering of the jobs, no setup
/// before the first job.
pub fn brute_force_min_flowtime<T: Time>(groups: &[JobGroup<T>], cap: usize) -> Result<T, TooLarge> {
    // merge groups sharing a key
    let mut labels: Vec<(BlockKey, T, T, usize)> = Vec::new();
    for g in groups {
        match labels.iter_mut().find(|l| l.0 == g.key) {
            Some(l) => l.3 += g.count,
            None => labels.push((g.key, g.proc, g.setup, g.count)),
        }
    }
    let jobs: usize = labels.iter().map(|l| l.3).sum();
    if jobs > cap {
        return Err(TooLarge { jobs, cap });
    }
    let mut counts: Vec<usize> = labels.iter().map(|l| l.3).collect();
    let mut best: Option<T> = None;
    for_each_arrangement(&mut counts, &mut Vec::new(), &mut |order| {
        let mut clock = T::zero();
        let mut total = T::zero();
        for (i, &label) in order.iter().enumerate() {
            let (_, p, s, _) = labels[label];
            if i > 0 && order[i - 1] != label {
                clock += s;
            }
            clock += p;
            total += clock;
        }
        if best.is_none_or(|b| total < b) {
            best = Some(total);
        }
    });
    Ok(best.unwrap_or_else(T::zero))
}

/// One machine's share of a candidate solution.
struct Realized<T> {
    flowtime: T,
    end: T,
    /// Last start of each family on the machine.
    last: Vec<Option<T>>,
}

/// Simulates a family sequence on machine `m` without idle time. `None` if a
/// start misses its qualification deadline.
fn realize<T: Time>(inst: &Instance<T>, m: usize, order: &[usize]) -> Option<Realized<T>> {
    let nf = inst.families.len();
    let mut last: Vec<Option<T>> = vec![None; nf];
    let mut clock = T::zero();
    let mut flowtime = T::zero();
    for (i, &f) in order.iter().enumerate() {
        let fam = &inst.families[f];
        debug_assert!(fam.qualified.contains(&m));
        if i > 0 && order[i - 1] != f {
            clock += fam.setup;
        }
        let limit = match last[f] {
            Some(t) => t + fam.gamma,
            None => fam.gamma,
        };
        if clock > limit {
            return None;
        }
        last[f] = Some(clock);
        clock += fam.proc;
        flowtime += clock;
    }
    Some(Realized { flowtime, end: clock, last })
}

/// Every way of splitting `n` jobs over `slots` machines.
fn splits(n: usize, slots: usize) -> Vec<Vec<usize>> {
    if slots == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in splits(n - first, slots - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Lexicographic optimum `(flow time, disqualifications)` by enumerating
/// every job-to-machine split and every per-machine family ordering, packed
/// without idle time. `Ok(None)` when no schedule meets the thresholds.
pub fn brute_force_solve<T: Time>(inst: &Instance<T>, cap: usize) -> Result<Option<(T, usize)>, TooLarge> {
    let jobs: usize = inst.families.iter().map(|f| f.jobs).sum();
    if jobs > cap {
        return Err(TooLarge { jobs, cap });
    }
    let nm = inst.machines;
    let nf = inst.families.len();
    let per_family: Vec<Vec<Vec<usize>>> =
        inst.families.iter().map(|f| splits(f.jobs, f.qualified.len())).collect();

    let mut best: Option<(T, usize)> = None;
    let mut choice = vec![0usize; nf];
    loop {
        // counts[m][f] for the current combination of splits
        let mut counts = vec![vec![0usize; nf]; nm];
        for f in 0..nf {
            for (slot, &m) in inst.families[f].qualified.iter().enumerate() {
                counts[m][f] = per_family[f][choice[f]][slot];
            }
        }
        let options: Vec<Vec<Realized<T>>> = (0..nm)
            .map(|m| {
                let mut found = Vec::new();
                for_each_arrangement(&mut counts[m].clone(), &mut Vec::new(), &mut |order| {
                    if let Some(r) = realize(inst, m, order) {
                        found.push(r);
                    }
                });
                found
            })
            .collect();
        if options.iter().all(|o| !o.is_empty()) {
            let mut pick = vec![0usize; nm];
            loop {
                let chosen: Vec<&Realized<T>> = (0..nm).map(|m| &options[m][pick[m]]).collect();
                let flowtime = chosen.iter().fold(T::zero(), |acc, r| acc + r.flowtime);
                let horizon = chosen.iter().map(|r| r.end).fold(T::zero(), |a, b| a.max(b));
                let mut losses = 0;
                for (f, fam) in inst.families.iter().enumerate() {
                    for &m in &fam.qualified {
                        let since = chosen[m].last[f].unwrap_or_else(T::zero);
                        if horizon - since > fam.gamma {
                            losses += 1;
                        }
                    }
                }
                if best.is_none_or(|b| (flowtime, losses) < b) {
                    best = Some((flowtime, losses));
                }
                if !advance(&mut pick, |m| options[m].len()) {
                    break;
                }
            }
        }
        if !advance(&mut choice, |f| per_family[f].len()) {
            break;
        }
    }
    Ok(best)
}

/// Odometer increment; `false` once every position has wrapped.
fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in 0..digits.len() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}
