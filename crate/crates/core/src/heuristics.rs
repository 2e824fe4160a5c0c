//! Greedy constructors for feasible schedules.
//!
//! They stand in for the scheduling-centric and qualification-centric
//! heuristics used as warm starts: the first chases flow time, the second
//! keeps qualifications alive. Both only append jobs at the end of a machine,
//! so they produce left-packed schedules, and both break ties by family id
//! then machine id.

use crate::instance::Instance;
use crate::num::Time;
use crate::schedule::{left_pack_unchecked, Schedule};

/// Incremental state of one machine while a sequence is being built.
#[derive(Debug, Clone)]
struct MachineTrack<T> {
    clock: T,
    last: Option<usize>,
    last_start: Vec<Option<T>>,
}

impl<T: Time> MachineTrack<T> {
    fn new(families: usize) -> Self {
        MachineTrack { clock: T::zero(), last: None, last_start: vec![None; families] }
    }

    /// Start time if a job of `f` were appended now.
    fn start_of(&self, inst: &Instance<T>, f: usize) -> T {
        match self.last {
            Some(prev) if prev != f => self.clock + inst.families[f].setup,
            _ => self.clock,
        }
    }

    /// Latest start keeping the qualification for `f`.
    fn deadline(&self, inst: &Instance<T>, f: usize) -> T {
        self.last_start[f].unwrap_or_else(T::zero) + inst.families[f].gamma
    }

    fn push(&mut self, inst: &Instance<T>, f: usize) {
        let start = self.start_of(inst, f);
        self.clock = start + inst.families[f].proc;
        self.last = Some(f);
        self.last_start[f] = Some(start);
    }
}

/// Repeatedly appends the job with the earliest possible completion among
/// placements that keep the machine qualified. `None` when it dead-ends.
pub fn scheduling_centric<T: Time>(inst: &Instance<T>) -> Option<Schedule<T>> {
    let nf = inst.family_count();
    let mut remaining: Vec<usize> = inst.families.iter().map(|f| f.jobs).collect();
    let mut tracks = vec![MachineTrack::new(nf); inst.machines];
    let mut seqs = vec![Vec::new(); inst.machines];

    for _ in 0..inst.job_count() {
        let mut best: Option<(T, usize, usize)> = None;
        for (f, fam) in inst.families.iter().enumerate() {
            if remaining[f] == 0 {
                continue;
            }
            for &m in &fam.qualified {
                let track = &tracks[m];
                let start = track.start_of(inst, f);
                if start > track.deadline(inst, f) {
                    continue;
                }
                let end = start + fam.proc;
                if best.is_none_or(|(b, _, _)| end < b) {
                    best = Some((end, f, m));
                }
            }
        }
        let (_, f, m) = best?;
        tracks[m].push(inst, f);
        seqs[m].push(f);
        remaining[f] -= 1;
    }
    Some(left_pack_unchecked(inst, &seqs))
}

/// Serves machines in order of availability; each picks the family whose
/// qualification deadline on it is the most urgent. A machine that can take
/// no further job is retired. `None` when jobs remain and every machine is
/// retired.
pub fn qualification_centric<T: Time>(inst: &Instance<T>) -> Option<Schedule<T>> {
    let nf = inst.family_count();
    let mut remaining: Vec<usize> = inst.families.iter().map(|f| f.jobs).collect();
    let mut left = inst.job_count();
    let mut tracks = vec![MachineTrack::new(nf); inst.machines];
    let mut retired = vec![false; inst.machines];
    let mut seqs = vec![Vec::new(); inst.machines];

    while left > 0 {
        let m = (0..inst.machines).filter(|&m| !retired[m]).min_by_key(|&m| (tracks[m].clock, m))?;
        let track = &tracks[m];
        let pick = (0..nf)
            .filter(|&f| remaining[f] > 0 && inst.is_qualified(f, m))
            .filter(|&f| track.start_of(inst, f) <= track.deadline(inst, f))
            .min_by_key(|&f| (track.deadline(inst, f), f));
        match pick {
            Some(f) => {
                tracks[m].push(inst, f);
                seqs[m].push(f);
                remaining[f] -= 1;
                left -= 1;
            }
            None => retired[m] = true,
        }
    }
    Some(left_pack_unchecked(inst, &seqs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Family;
    use crate::schedule::tests::ten_jobs;
    use crate::schedule::{check_validity, count_disqualifications};

    fn infeasible_toy() -> Instance<i64> {
        Instance::new(1, vec![Family::new(2, 5, 0, 4, vec![0])])
    }

    #[test]
    fn scheduling_centric_on_ten_jobs() {
        let inst = ten_jobs();
        let s = scheduling_centric(&inst).expect("feasible");
        assert!(check_validity(&inst, &s).is_empty());
        assert!(s.flowtime() >= 114);
    }

    #[test]
    fn scheduling_centric_single_family() {
        let inst = Instance::new(3, vec![Family::new(4, 3i64, 2, 50, vec![1])]);
        let s = scheduling_centric(&inst).unwrap();
        assert_eq!(s.flowtime(), 3 * (1 + 2 + 3 + 4));
        assert_eq!(s.machines[1].len(), 4);
    }

    #[test]
    fn heuristics_fail_on_infeasible_toy() {
        assert!(scheduling_centric(&infeasible_toy()).is_none());
        assert!(qualification_centric(&infeasible_toy()).is_none());
    }

    #[test]
    fn qualification_centric_on_ten_jobs() {
        let inst = ten_jobs();
        let s = qualification_centric(&inst).expect("feasible");
        assert!(check_validity(&inst, &s).is_empty());
        // frozen from the first run
        assert_eq!(s.sequences(), vec![vec![2, 2, 1, 1], vec![2, 2, 0, 1, 0, 0]]);
        assert_eq!(count_disqualifications(&inst, &s).count, GOLDEN_QC_LOSSES);
    }

    const GOLDEN_QC_LOSSES: usize = 3;

    #[test]
    fn huge_thresholds_mean_no_loss() {
        let mut inst = ten_jobs();
        for f in &mut inst.families {
            f.gamma = 1000;
        }
        for s in [scheduling_centric(&inst), qualification_centric(&inst)] {
            let s = s.unwrap();
            assert!(check_validity(&inst, &s).is_empty());
            assert_eq!(count_disqualifications(&inst, &s).count, 0);
        }
    }
}
