//! Bounds store over the assignment-level variables and the cost-based rules
//! that tighten it.
//!
//! For every machine the store keeps the multiset of jobs already decided to
//! run there, and interval bounds on the machine flow time, the number of jobs
//! on the machine and the number of jobs of each family on the machine. The
//! rules compare the single-machine relaxation optimum ([`min_flowtime`]) of
//! decided or hypothetical job sets against those bounds:
//!
//! * [`rule_flowtime_assigned`]: the decided jobs alone bound the machine flow time.
//! * [`rule_flowtime_extended`]: so do the decided jobs plus the cheapest jobs
//!   the machine must still receive.
//! * [`rule_max_family_jobs`]: caps the jobs of one family on a machine.
//! * [`rule_max_machine_jobs`]: caps the jobs on a machine.
//!
//! Cheapest jobs are taken in SPT order with their setup zeroed, which can
//! only under-estimate the real cost. [`propagate`] runs the enabled rules
//! together with the linear sum constraints until nothing changes. Every step
//! only tightens bounds and is monotone, so the fixpoint does not depend on
//! the order of application.

use std::fmt;

use thiserror::Error;

use crate::instance::Instance;
use crate::num::Time;
use crate::relaxation::{min_flowtime, JobGroup};

/// Closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bounds<X> {
    pub lo: X,
    pub hi: X,
}

impl<X: Ord + Copy> Bounds<X> {
    pub fn new(lo: X, hi: X) -> Self {
        Bounds { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    fn raise(&mut self, lo: X) -> Result<bool, Inconsistency> {
        if lo <= self.lo {
            return Ok(false);
        }
        self.lo = lo;
        if self.is_empty() {
            Err(Inconsistency)
        } else {
            Ok(true)
        }
    }

    fn lower(&mut self, hi: X) -> Result<bool, Inconsistency> {
        if hi >= self.hi {
            return Ok(false);
        }
        self.hi = hi;
        if self.is_empty() {
            Err(Inconsistency)
        } else {
            Ok(true)
        }
    }
}

impl<X: fmt::Display> fmt::Display for Bounds<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// The store admits no solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("domain store is inconsistent")]
pub struct Inconsistency;

/// `Ok(true)` when some bound moved.
pub type Outcome = Result<bool, Inconsistency>;

/// Bounds of one search state. All per-machine vectors are indexed by
/// machine, then family.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DomainStore<T> {
    /// Decided jobs per machine and family.
    pub assigned: Vec<Vec<usize>>,
    pub machine_flow: Vec<Bounds<T>>,
    pub machine_jobs: Vec<Bounds<usize>>,
    /// `[0, 0]` for unqualified pairs.
    pub family_jobs: Vec<Vec<Bounds<usize>>>,
    pub flowtime: Bounds<T>,
    /// Stands for an unbounded flow time.
    pub infinity: T,
}

impl<T: Time> DomainStore<T> {
    /// Root store: nothing decided, only the trivial bounds.
    pub fn new(inst: &Instance<T>) -> Self {
        let (nm, nf) = (inst.machines, inst.family_count());
        let infinity = inst.flowtime_sentinel();
        let family_jobs = (0..nm)
            .map(|m| {
                (0..nf)
                    .map(|f| {
                        let hi = if inst.is_qualified(f, m) { inst.families[f].jobs } else { 0 };
                        Bounds::new(0, hi)
                    })
                    .collect()
            })
            .collect();
        DomainStore {
            assigned: vec![vec![0; nf]; nm],
            machine_flow: vec![Bounds::new(T::zero(), infinity); nm],
            machine_jobs: vec![Bounds::new(0, inst.job_count()); nm],
            family_jobs,
            flowtime: Bounds::new(T::zero(), infinity),
            infinity,
        }
    }

    pub fn assigned_total(&self, m: usize) -> usize {
        self.assigned[m].iter().sum()
    }

    /// Decides one more job of `f` on `m`. Bounds are not touched.
    pub fn assign(&mut self, m: usize, f: usize) {
        self.assigned[m][f] += 1;
    }

    /// Lowers the upper bound of the global flow time.
    pub fn restrict_flowtime(&mut self, hi: T) -> Outcome {
        self.flowtime.lower(hi)
    }

    /// Raises the lower bound of the global flow time.
    pub fn require_flowtime(&mut self, lo: T) -> Outcome {
        self.flowtime.raise(lo)
    }

    /// Raises the lower bound of a machine flow time.
    pub fn raise_machine_flow(&mut self, m: usize, lo: T) -> Outcome {
        self.machine_flow[m].raise(lo)
    }

    /// Fixes machine `m` to exactly its decided jobs and flow time.
    pub fn close_machine(&mut self, m: usize, flowtime: T) -> Outcome {
        let n = self.assigned_total(m);
        let a = self.machine_jobs[m].lower(n)?;
        let b = self.machine_jobs[m].raise(n)?;
        let c = self.machine_flow[m].raise(flowtime)?;
        let d = self.machine_flow[m].lower(flowtime)?;
        Ok(a | b | c | d)
    }

    pub fn is_finite(&self, v: T) -> bool {
        v < self.infinity
    }

    /// Jobs of `f` not decided on any machine.
    fn unassigned(&self, inst: &Instance<T>, f: usize) -> usize {
        let placed: usize = self.assigned.iter().map(|row| row[f]).sum();
        inst.families[f].jobs.saturating_sub(placed)
    }

    /// Jobs of `f` that can still be added to `m`.
    pub fn available(&self, inst: &Instance<T>, m: usize, f: usize) -> usize {
        if !inst.is_qualified(f, m) {
            return 0;
        }
        let room = self.family_jobs[m][f].hi.saturating_sub(self.assigned[m][f]);
        room.min(self.unassigned(inst, f))
    }

    fn decided_groups(&self, inst: &Instance<T>, m: usize) -> Vec<JobGroup<T>> {
        self.assigned[m]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(f, &c)| JobGroup::family(f, c, inst.families[f].proc, inst.families[f].setup))
            .collect()
    }

    /// The first `k` jobs that may still join `m`, in SPT order, setups
    /// zeroed. `None` when fewer than `k` are available.
    fn cheapest_extras(&self, inst: &Instance<T>, m: usize, k: usize) -> Option<Vec<JobGroup<T>>> {
        let mut left = k;
        let mut out = Vec::new();
        for f in inst.spt_order() {
            if left == 0 {
                break;
            }
            let take = self.available(inst, m, f).min(left);
            if take > 0 {
                out.push(JobGroup::relaxed(f, take, inst.families[f].proc));
                left -= take;
            }
        }
        (left == 0).then_some(out)
    }

    fn available_total(&self, inst: &Instance<T>, m: usize) -> usize {
        (0..inst.family_count()).map(|f| self.available(inst, m, f)).sum()
    }
}

/// `FT*` of the jobs decided on `m`.
pub fn assigned_bound<T: Time>(inst: &Instance<T>, store: &DomainStore<T>, m: usize) -> T {
    min_flowtime(&store.decided_groups(inst, m))
}

/// `FT*` of the decided jobs on `m` plus the cheapest jobs needed to reach
/// the lower bound on its job count.
pub fn extended_bound<T: Time>(
    inst: &Instance<T>,
    store: &DomainStore<T>,
    m: usize,
) -> Result<T, Inconsistency> {
    let need = store.machine_jobs[m].lo.saturating_sub(store.assigned_total(m));
    let mut groups = store.decided_groups(inst, m);
    groups.extend(store.cheapest_extras(inst, m, need).ok_or(Inconsistency)?);
    Ok(min_flowtime(&groups))
}

/// Machine flow time is at least the relaxation optimum of its decided jobs.
pub fn rule_flowtime_assigned<T: Time>(inst: &Instance<T>, store: &mut DomainStore<T>, m: usize) -> Outcome {
    if store.assigned_total(m) == 0 {
        return Ok(false);
    }
    let bound = assigned_bound(inst, store, m);
    store.machine_flow[m].raise(bound)
}

/// Machine flow time is at least the relaxation optimum of its decided jobs
/// completed with the cheapest jobs it must still receive.
pub fn rule_flowtime_extended<T: Time>(inst: &Instance<T>, store: &mut DomainStore<T>, m: usize) -> Outcome {
    let bound = extended_bound(inst, store, m)?;
    store.machine_flow[m].raise(bound)
}

/// Largest `k` in `[lo, hi]` with `cost(k) <= limit`, for non-decreasing `cost`.
fn largest_within<T: Time>(lo: usize, hi: usize, limit: T, mut cost: impl FnMut(usize) -> T) -> Option<usize> {
    if cost(lo) > limit {
        return None;
    }
    if cost(hi) <= limit {
        return Some(hi);
    }
    let (mut ok, mut bad) = (lo, hi);
    while bad - ok > 1 {
        let mid = ok + (bad - ok) / 2;
        if cost(mid) <= limit {
            ok = mid;
        } else {
            bad = mid;
        }
    }
    Some(ok)
}

/// Caps the jobs of `f` on `m` at the largest count whose relaxation optimum,
/// together with the decided jobs, fits the machine flow-time upper bound.
pub fn rule_max_family_jobs<T: Time>(
    inst: &Instance<T>,
    store: &mut DomainStore<T>,
    f: usize,
    m: usize,
) -> Outcome {
    let limit = store.machine_flow[m].hi;
    if !inst.is_qualified(f, m) || !store.is_finite(limit) {
        return Ok(false);
    }
    let have = store.assigned[m][f];
    let hi = store.family_jobs[m][f].hi;
    if hi < have {
        return Err(Inconsistency);
    }
    let mut groups = store.decided_groups(inst, m);
    groups.retain(|g| g.key.family() != f);
    let fam = &inst.families[f];
    let best = largest_within(have, hi, limit, |k| {
        groups.push(JobGroup::family(f, k, fam.proc, fam.setup));
        let ft = min_flowtime(&groups);
        groups.pop();
        ft
    })
    .ok_or(Inconsistency)?;
    store.family_jobs[m][f].lower(best)
}

/// Caps the jobs on `m` at the largest count whose relaxation optimum,
/// decided jobs plus cheapest extras, fits the machine flow-time upper bound.
pub fn rule_max_machine_jobs<T: Time>(inst: &Instance<T>, store: &mut DomainStore<T>, m: usize) -> Outcome {
    let limit = store.machine_flow[m].hi;
    if !store.is_finite(limit) {
        return Ok(false);
    }
    let have = store.assigned_total(m);
    let hi = store.machine_jobs[m].hi.min(have + store.available_total(inst, m));
    if hi < have {
        return Err(Inconsistency);
    }
    let decided = store.decided_groups(inst, m);
    let best = largest_within(have, hi, limit, |k| {
        let mut groups = decided.clone();
        groups.extend(store.cheapest_extras(inst, m, k - have).expect("count within availability"));
        min_flowtime(&groups)
    })
    .ok_or(Inconsistency)?;
    store.machine_jobs[m].lower(best)
}

fn tighten_usize(b: &mut Bounds<usize>, lo: i64, hi: i64) -> Outcome {
    if hi < 0 || lo > hi {
        return Err(Inconsistency);
    }
    let a = b.raise(lo.max(0) as usize)?;
    let c = b.lower(hi as usize)?;
    Ok(a | c)
}

/// Linear links between the variables: decided jobs bound the counts, each
/// family's counts sum to its size, per-machine family counts sum to the
/// machine count, machine counts sum to `N`, machine flow times sum to the
/// flow time.
pub fn sum_consistency<T: Time>(inst: &Instance<T>, store: &mut DomainStore<T>) -> Outcome {
    let (nm, nf) = (inst.machines, inst.family_count());
    let mut changed = false;

    for m in 0..nm {
        for f in 0..nf {
            changed |= store.family_jobs[m][f].raise(store.assigned[m][f])?;
        }
    }

    for (f, fam) in inst.families.iter().enumerate() {
        let n = fam.jobs as i64;
        let lo_sum: i64 = (0..nm).map(|m| store.family_jobs[m][f].lo as i64).sum();
        let hi_sum: i64 = (0..nm).map(|m| store.family_jobs[m][f].hi as i64).sum();
        for m in 0..nm {
            let b = store.family_jobs[m][f];
            changed |= tighten_usize(
                &mut store.family_jobs[m][f],
                n - (hi_sum - b.hi as i64),
                n - (lo_sum - b.lo as i64),
            )?;
        }
    }

    for m in 0..nm {
        let lo_sum: i64 = store.family_jobs[m].iter().map(|b| b.lo as i64).sum();
        let hi_sum: i64 = store.family_jobs[m].iter().map(|b| b.hi as i64).sum();
        changed |= tighten_usize(&mut store.machine_jobs[m], lo_sum, hi_sum)?;
        let total = store.machine_jobs[m];
        for f in 0..nf {
            let b = store.family_jobs[m][f];
            changed |= tighten_usize(
                &mut store.family_jobs[m][f],
                total.lo as i64 - (hi_sum - b.hi as i64),
                total.hi as i64 - (lo_sum - b.lo as i64),
            )?;
        }
    }

    let n = inst.job_count() as i64;
    let lo_sum: i64 = store.machine_jobs.iter().map(|b| b.lo as i64).sum();
    let hi_sum: i64 = store.machine_jobs.iter().map(|b| b.hi as i64).sum();
    for m in 0..nm {
        let b = store.machine_jobs[m];
        changed |= tighten_usize(
            &mut store.machine_jobs[m],
            n - (hi_sum - b.hi as i64),
            n - (lo_sum - b.lo as i64),
        )?;
    }

    changed |= flow_sums(store)?;
    Ok(changed)
}

fn flow_sums<T: Time>(store: &mut DomainStore<T>) -> Outcome {
    let inf = store.infinity;
    let clamp = |v: T| if v >= inf { inf } else { v };
    let lo_sum = store.machine_flow.iter().fold(T::zero(), |acc, b| acc.sat_add(b.lo));
    let hi_sum = store.machine_flow.iter().fold(T::zero(), |acc, b| acc.sat_add(b.hi));

    let mut changed = store.flowtime.raise(lo_sum)?;
    changed |= store.flowtime.lower(clamp(hi_sum))?;

    let global = store.flowtime;
    for m in 0..store.machine_flow.len() {
        let b = store.machine_flow[m];
        let others_lo = lo_sum - b.lo;
        if store.is_finite(global.hi) {
            changed |= store.machine_flow[m].lower(global.hi - others_lo)?;
        }
        let others_hi = store
            .machine_flow
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != m)
            .fold(T::zero(), |acc, (_, b)| acc.sat_add(b.hi));
        if others_hi < inf {
            changed |= store.machine_flow[m].raise(global.lo - others_hi)?;
        }
    }
    Ok(changed)
}

/// Which cost-based rules run during propagation. The sum links always run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RuleSet {
    pub assigned: bool,
    pub extended: bool,
    pub family_jobs: bool,
    pub machine_jobs: bool,
}

impl RuleSet {
    pub const NONE: RuleSet = RuleSet { assigned: false, extended: false, family_jobs: false, machine_jobs: false };
    /// Extended flow-time bound only.
    pub const L: RuleSet = RuleSet { extended: true, ..RuleSet::NONE };
    /// Family job-count caps only.
    pub const F: RuleSet = RuleSet { family_jobs: true, ..RuleSet::NONE };
    /// Machine job-count caps only.
    pub const M: RuleSet = RuleSet { machine_jobs: true, ..RuleSet::NONE };
    pub const ALL: RuleSet = RuleSet { assigned: true, extended: true, family_jobs: true, machine_jobs: true };

    /// Label letter: `_`, `L`, `F`, `M` or `A`; `None` for other combinations.
    pub fn letter(self) -> Option<char> {
        match self {
            RuleSet::NONE => Some('_'),
            RuleSet::L => Some('L'),
            RuleSet::F => Some('F'),
            RuleSet::M => Some('M'),
            RuleSet::ALL => Some('A'),
            _ => None,
        }
    }

    pub fn from_letter(c: char) -> Option<RuleSet> {
        match c {
            '_' => Some(RuleSet::NONE),
            'L' => Some(RuleSet::L),
            'F' => Some(RuleSet::F),
            'M' => Some(RuleSet::M),
            'A' => Some(RuleSet::ALL),
            _ => None,
        }
    }

    /// Propagation steps of this rule set, in default order.
    pub fn steps(self, inst: &Instance<impl Time>) -> Vec<Step> {
        let mut steps = vec![Step::Sums];
        for m in 0..inst.machines {
            if self.assigned {
                steps.push(Step::Assigned(m));
            }
            if self.extended {
                steps.push(Step::Extended(m));
            }
            if self.family_jobs {
                for f in 0..inst.family_count() {
                    if inst.is_qualified(f, m) {
                        steps.push(Step::FamilyJobs(f, m));
                    }
                }
            }
            if self.machine_jobs {
                steps.push(Step::MachineJobs(m));
            }
        }
        steps
    }
}

/// One propagation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Sums,
    Assigned(usize),
    Extended(usize),
    FamilyJobs(usize, usize),
    MachineJobs(usize),
}

impl Step {
    pub fn apply<T: Time>(self, inst: &Instance<T>, store: &mut DomainStore<T>) -> Outcome {
        match self {
            Step::Sums => sum_consistency(inst, store),
            Step::Assigned(m) => rule_flowtime_assigned(inst, store, m),
            Step::Extended(m) => rule_flowtime_extended(inst, store, m),
            Step::FamilyJobs(f, m) => rule_max_family_jobs(inst, store, f, m),
            Step::MachineJobs(m) => rule_max_machine_jobs(inst, store, m),
        }
    }
}

/// Runs `steps` round-robin until a full round changes nothing.
pub fn propagate_steps<T: Time>(inst: &Instance<T>, store: &mut DomainStore<T>, steps: &[Step]) -> Result<(), Inconsistency> {
    loop {
        let mut changed = false;
        for step in steps {
            changed |= step.apply(inst, store)?;
        }
        if !changed {
            return Ok(());
        }
    }
}

/// Tightens `store` to the fixpoint of the sum links and the enabled rules.
pub fn propagate<T: Time>(inst: &Instance<T>, store: &mut DomainStore<T>, rules: RuleSet) -> Result<(), Inconsistency> {
    propagate_steps(inst, store, &rules.steps(inst))
}
