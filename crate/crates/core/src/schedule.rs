//! Concrete schedules and their evaluation.
//!
//! A machine loses its qualification for a family when `γ_f` time units pass
//! without a start of that family. Starts are compared start-to-start, the
//! clock of a family that never ran starts at 0, and reaching exactly `γ_f`
//! keeps the qualification. At the end of the schedule every qualified pair is
//! judged against the global horizon, the last completion on any machine.
//! During the schedule a job may only start on a machine that still holds
//! the qualification.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Instance;
use crate::num::Time;

/// One job occurrence on a machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Entry<T> {
    pub family: usize,
    pub start: T,
    pub end: T,
}

/// Per-machine job lists, ordered by start time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Schedule<T> {
    pub machines: Vec<Vec<Entry<T>>>,
}

impl<T: Time> Schedule<T> {
    /// Builds a schedule from explicit start times, deriving completions.
    pub fn from_starts(inst: &Instance<T>, starts: &[Vec<(usize, T)>]) -> Self {
        let machines = starts
            .iter()
            .map(|jobs| {
                jobs.iter()
                    .map(|&(family, start)| Entry { family, start, end: start + inst.families[family].proc })
                    .collect()
            })
            .collect();
        Schedule { machines }
    }

    /// Last completion over all machines, 0 for an empty schedule.
    pub fn horizon(&self) -> T {
        self.machines
            .iter()
            .flat_map(|jobs| jobs.iter().map(|e| e.end))
            .max()
            .unwrap_or_else(T::zero)
    }

    pub fn flowtime(&self) -> T {
        flowtime(self)
    }

    pub fn job_count(&self) -> usize {
        self.machines.iter().map(Vec::len).sum()
    }

    /// Family sequence of every machine.
    pub fn sequences(&self) -> Vec<Vec<usize>> {
        self.machines.iter().map(|jobs| jobs.iter().map(|e| e.family).collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("expected {expected} machine sequences, got {found}")]
    MachineCount { expected: usize, found: usize },
    #[error("family {} does not exist", .0 + 1)]
    UnknownFamily(usize),
    #[error("family {} has {expected} jobs but {found} are sequenced", .family + 1)]
    Coverage { family: usize, expected: usize, found: usize },
    #[error("machine {} is not qualified for family {}", .machine + 1, .family + 1)]
    NotQualified { machine: usize, family: usize },
    #[error("malformed schedule file: {0}")]
    Format(String),
}

/// Realizes family sequences with every job as early as the machine and
/// the setups allow.
pub fn left_pack<T: Time>(inst: &Instance<T>, seqs: &[Vec<usize>]) -> Result<Schedule<T>, ScheduleError> {
    if seqs.len() != inst.machines {
        return Err(ScheduleError::MachineCount { expected: inst.machines, found: seqs.len() });
    }
    let mut counts = vec![0usize; inst.family_count()];
    for (m, seq) in seqs.iter().enumerate() {
        for &f in seq {
            if f >= inst.family_count() {
                return Err(ScheduleError::UnknownFamily(f));
            }
            if !inst.is_qualified(f, m) {
                return Err(ScheduleError::NotQualified { machine: m, family: f });
            }
            counts[f] += 1;
        }
    }
    for (f, &found) in counts.iter().enumerate() {
        if found != inst.families[f].jobs {
            return Err(ScheduleError::Coverage { family: f, expected: inst.families[f].jobs, found });
        }
    }
    Ok(left_pack_unchecked(inst, seqs))
}

/// [`left_pack`] without coverage or qualification checks; also used for
/// partial sequences.
pub(crate) fn left_pack_unchecked<T: Time>(inst: &Instance<T>, seqs: &[Vec<usize>]) -> Schedule<T> {
    let machines = seqs
        .iter()
        .map(|seq| {
            let mut clock = T::zero();
            let mut prev: Option<usize> = None;
            seq.iter()
                .map(|&f| {
                    let fam = &inst.families[f];
                    if prev.is_some_and(|p| p != f) {
                        clock += fam.setup;
                    }
                    let start = clock;
                    clock += fam.proc;
                    prev = Some(f);
                    Entry { family: f, start, end: clock }
                })
                .collect()
        })
        .collect();
    Schedule { machines }
}

/// Sum of completion times.
pub fn flowtime<T: Time>(s: &Schedule<T>) -> T {
    s.machines.iter().flat_map(|jobs| jobs.iter().map(|e| e.end)).sum()
}

/// A broken schedule invariant, 0-based locators; `index` is the position
/// on the machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation<T> {
    MachineCount { expected: usize, found: usize },
    UnknownFamily { machine: usize, index: usize },
    NegativeStart { machine: usize, index: usize },
    WrongDuration { machine: usize, index: usize },
    Unsorted { machine: usize, index: usize },
    Overlap { machine: usize, index: usize },
    MissingSetup { machine: usize, index: usize },
    NotQualified { machine: usize, index: usize, family: usize },
    /// A start later than the qualification deadline; `deadline` is the
    /// previous same-family start plus `γ`, or `γ` for the first one.
    Disqualified { machine: usize, index: usize, family: usize, deadline: T },
    Coverage { family: usize, expected: usize, found: usize },
}

impl<T: fmt::Display> fmt::Display for ScheduleViolation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScheduleViolation::*;
        match self {
            MachineCount { expected, found } => write!(f, "expected {expected} machines, found {found}"),
            UnknownFamily { machine, index } => {
                write!(f, "machine {} job {}: unknown family", machine + 1, index + 1)
            }
            NegativeStart { machine, index } => {
                write!(f, "machine {} job {}: negative start", machine + 1, index + 1)
            }
            WrongDuration { machine, index } => {
                write!(f, "machine {} job {}: duration differs from processing time", machine + 1, index + 1)
            }
            Unsorted { machine, index } => {
                write!(f, "machine {} job {}: starts before its predecessor", machine + 1, index + 1)
            }
            Overlap { machine, index } => {
                write!(f, "machine {} job {}: overlaps its predecessor", machine + 1, index + 1)
            }
            MissingSetup { machine, index } => {
                write!(f, "machine {} job {}: setup time not respected", machine + 1, index + 1)
            }
            NotQualified { machine, index, family } => write!(
                f,
                "machine {} job {}: machine not qualified for family {}",
                machine + 1,
                index + 1,
                family + 1
            ),
            Disqualified { machine, index, family, deadline } => write!(
                f,
                "machine {} job {}: family {} starts after the qualification deadline {deadline}",
                machine + 1,
                index + 1,
                family + 1
            ),
            Coverage { family, expected, found } => {
                write!(f, "family {}: {found} jobs scheduled, {expected} expected", family + 1)
            }
        }
    }
}

/// Every violated schedule invariant. Empty means the schedule is valid.
pub fn check_validity<T: Time>(inst: &Instance<T>, s: &Schedule<T>) -> Vec<ScheduleViolation<T>> {
    use ScheduleViolation::*;
    let mut out = Vec::new();
    if s.machines.len() != inst.machines {
        out.push(MachineCount { expected: inst.machines, found: s.machines.len() });
    }
    let nf = inst.family_count();
    let mut counts = vec![0usize; nf];
    for (machine, jobs) in s.machines.iter().enumerate() {
        let mut last_start: Vec<Option<T>> = vec![None; nf];
        for (index, e) in jobs.iter().enumerate() {
            if e.family >= nf {
                out.push(UnknownFamily { machine, index });
                continue;
            }
            let fam = &inst.families[e.family];
            counts[e.family] += 1;
            if e.start < T::zero() {
                out.push(NegativeStart { machine, index });
            }
            if e.end - e.start != fam.proc {
                out.push(WrongDuration { machine, index });
            }
            if index > 0 {
                let prev = &jobs[index - 1];
                if e.start < prev.start {
                    out.push(Unsorted { machine, index });
                } else if e.start < prev.end {
                    out.push(Overlap { machine, index });
                } else if prev.family != e.family && e.start < prev.end + fam.setup {
                    out.push(MissingSetup { machine, index });
                }
            }
            if !fam.is_qualified(machine) {
                out.push(NotQualified { machine, index, family: e.family });
                continue;
            }
            let deadline = last_start[e.family].unwrap_or_else(T::zero) + fam.gamma;
            if e.start > deadline {
                out.push(Disqualified { machine, index, family: e.family, deadline });
            }
            last_start[e.family] = Some(e.start);
        }
    }
    for (family, &found) in counts.iter().enumerate() {
        let expected = inst.families[family].jobs;
        if found != expected {
            out.push(Coverage { family, expected, found });
        }
    }
    out
}

/// A qualification held at time 0 and lost before the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Loss<T> {
    pub family: usize,
    pub machine: usize,
    pub at: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disqualifications<T> {
    pub count: usize,
    pub losses: Vec<Loss<T>>,
}

/// Qualifications lost by the horizon, ordered by family then machine.
pub fn count_disqualifications<T: Time>(inst: &Instance<T>, s: &Schedule<T>) -> Disqualifications<T> {
    let horizon = s.horizon();
    let mut losses = Vec::new();
    for (family, fam) in inst.families.iter().enumerate() {
        for &machine in &fam.qualified {
            let last = s
                .machines
                .get(machine)
                .and_then(|jobs| jobs.iter().filter(|e| e.family == family).map(|e| e.start).max())
                .unwrap_or_else(T::zero);
            if horizon - last > fam.gamma {
                losses.push(Loss { family, machine, at: last + fam.gamma });
            }
        }
    }
    Disqualifications { count: losses.len(), losses }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    machines: Vec<MachineRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineRecord {
    id: usize,
    jobs: Vec<JobRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobRecord {
    family: usize,
    start: i64,
}

/// Serializes a schedule to JSON with 1-based ids; completions are implied.
pub fn save_schedule<T: Time>(s: &Schedule<T>) -> String {
    let file = ScheduleFile {
        machines: s
            .machines
            .iter()
            .enumerate()
            .map(|(m, jobs)| MachineRecord {
                id: m + 1,
                jobs: jobs
                    .iter()
                    .map(|e| JobRecord {
                        family: e.family + 1,
                        start: e.start.to_i64().expect("start does not fit the file format"),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("schedule serialization cannot fail")
}

/// Parses a schedule for `inst`. Machines absent from the file are empty.
pub fn load_schedule<T: Time>(inst: &Instance<T>, text: &str) -> Result<Schedule<T>, ScheduleError> {
    let file: ScheduleFile =
        serde_json::from_str(text).map_err(|e| ScheduleError::Format(e.to_string()))?;
    let mut starts: Vec<Vec<(usize, T)>> = vec![Vec::new(); inst.machines];
    for rec in file.machines {
        if rec.id == 0 || rec.id > inst.machines {
            return Err(ScheduleError::Format(format!("unknown machine id {}", rec.id)));
        }
        let slot = &mut starts[rec.id - 1];
        if !slot.is_empty() {
            return Err(ScheduleError::Format(format!("machine id {} listed twice", rec.id)));
        }
        for job in rec.jobs {
            if job.family == 0 || job.family > inst.family_count() {
                return Err(ScheduleError::UnknownFamily(job.family.wrapping_sub(1)));
            }
            let start = T::from_i64(job.start)
                .ok_or_else(|| ScheduleError::Format(format!("start {} out of range", job.start)))?;
            slot.push((job.family - 1, start));
        }
    }
    Ok(Schedule::from_starts(inst, &starts))
}
