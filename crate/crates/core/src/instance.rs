//! Problem data: families of identical jobs, machines, qualification sets.
//!
//! In memory, families and machines are addressed by 0-based index. The JSON
//! file format and every human-readable message use 1-based ids.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics;
use crate::num::Time;

/// A family of interchangeable jobs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Family<T> {
    /// Number of jobs in the family.
    pub jobs: usize,
    /// Processing time of each job.
    pub proc: T,
    /// Setup paid before a job of this family when the machine last ran another family.
    pub setup: T,
    /// Maximum start-to-start distance between two jobs of the family on a machine.
    pub gamma: T,
    /// Machines qualified for the family, sorted, 0-based.
    pub qualified: Vec<usize>,
}

impl<T: Time> Family<T> {
    pub fn new(jobs: usize, proc: T, setup: T, gamma: T, qualified: Vec<usize>) -> Self {
        let mut qualified = qualified;
        qualified.sort_unstable();
        Family { jobs, proc, setup, gamma, qualified }
    }

    pub fn is_qualified(&self, machine: usize) -> bool {
        self.qualified.binary_search(&machine).is_ok()
    }
}

/// A complete problem instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance<T> {
    pub machines: usize,
    pub families: Vec<Family<T>>,
}

/// One job, identified by its family and its ordinal inside the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobRef {
    pub family: usize,
    pub ordinal: usize,
}

impl<T: Time> Instance<T> {
    pub fn new(machines: usize, families: Vec<Family<T>>) -> Self {
        Instance { machines, families }
    }

    pub fn family_count(&self) -> usize {
        self.families.len()
    }

    /// Total number of jobs `N`.
    pub fn job_count(&self) -> usize {
        self.families.iter().map(|f| f.jobs).sum()
    }

    pub fn family(&self, f: usize) -> &Family<T> {
        &self.families[f]
    }

    pub fn is_qualified(&self, family: usize, machine: usize) -> bool {
        self.families[family].is_qualified(machine)
    }

    /// Every job of the instance, grouped by family, in ordinal order.
    pub fn jobs(&self) -> impl Iterator<Item = JobRef> + '_ {
        self.families
            .iter()
            .enumerate()
            .flat_map(|(family, fam)| (0..fam.jobs).map(move |ordinal| JobRef { family, ordinal }))
    }

    /// Number of qualified (family, machine) pairs, the largest possible
    /// disqualification count.
    pub fn qualified_pairs(&self) -> usize {
        self.families.iter().map(|f| f.qualified.len()).sum()
    }

    /// Family indices sorted by processing time, ties by index.
    pub fn spt_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.families.len()).collect();
        order.sort_by_key(|&f| (self.families[f].proc, f));
        order
    }

    /// A value strictly greater than the flow time of any left-packed schedule.
    pub fn flowtime_sentinel(&self) -> T {
        let n = T::from_count(self.job_count());
        let max_p = self.families.iter().map(|f| f.proc).max().unwrap_or_else(T::zero);
        let max_s = self.families.iter().map(|f| f.setup).max().unwrap_or_else(T::zero);
        n.sat_mul(max_p.sat_add(max_s)).sat_mul(n).sat_add(T::one())
    }

    /// Setup matrix indexed `[from][to]`: zero on the diagonal, `s_to` elsewhere.
    pub fn setup_matrix(&self) -> Vec<Vec<T>> {
        let nf = self.families.len();
        (0..nf)
            .map(|from| {
                (0..nf)
                    .map(|to| if from == to { T::zero() } else { self.families[to].setup })
                    .collect()
            })
            .collect()
    }

    /// Every violated instance invariant. Empty means the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.machines == 0 {
            out.push(Violation::NoMachines);
        }
        if self.families.is_empty() {
            out.push(Violation::NoFamilies);
        }
        for (f, fam) in self.families.iter().enumerate() {
            if fam.jobs == 0 {
                out.push(Violation::NoJobs { family: f });
            }
            if fam.proc < T::one() {
                out.push(Violation::NonPositiveProcessing { family: f });
            }
            if fam.setup < T::zero() {
                out.push(Violation::NegativeSetup { family: f });
            }
            if fam.gamma < T::one() {
                out.push(Violation::NonPositiveThreshold { family: f });
            }
            if fam.qualified.is_empty() {
                out.push(Violation::NoQualifiedMachine { family: f });
            }
            for (i, &m) in fam.qualified.iter().enumerate() {
                if m >= self.machines {
                    out.push(Violation::UnknownMachine { family: f, machine: m });
                }
                if i > 0 && fam.qualified[i - 1] >= m {
                    out.push(Violation::UnsortedQualification { family: f, machine: m });
                }
            }
        }
        out
    }
}

/// A violated instance invariant, with 0-based locators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoMachines,
    NoFamilies,
    NoJobs { family: usize },
    NonPositiveProcessing { family: usize },
    NegativeSetup { family: usize },
    NonPositiveThreshold { family: usize },
    NoQualifiedMachine { family: usize },
    UnknownMachine { family: usize, machine: usize },
    UnsortedQualification { family: usize, machine: usize },
    FamilyIds { expected: usize, found: Vec<i64> },
    OutOfRange { family: usize, field: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoMachines => write!(f, "instance has no machine"),
            Violation::NoFamilies => write!(f, "instance has no family"),
            Violation::NoJobs { family } => write!(f, "family {} has no job", family + 1),
            Violation::NonPositiveProcessing { family } => {
                write!(f, "family {}: processing time must be positive", family + 1)
            }
            Violation::NegativeSetup { family } => {
                write!(f, "family {}: setup time must be non-negative", family + 1)
            }
            Violation::NonPositiveThreshold { family } => {
                write!(f, "family {}: qualification threshold must be positive", family + 1)
            }
            Violation::NoQualifiedMachine { family } => {
                write!(f, "family {}: no qualified machine", family + 1)
            }
            Violation::UnknownMachine { family, machine } => {
                write!(f, "family {}: qualified machine {} does not exist", family + 1, machine + 1)
            }
            Violation::UnsortedQualification { family, machine } => write!(
                f,
                "family {}: qualified machine {} duplicated or out of order",
                family + 1,
                machine + 1
            ),
            Violation::FamilyIds { expected, found } => {
                write!(f, "family ids must be exactly 1..={expected}, found {found:?}")
            }
            Violation::OutOfRange { family, field } => {
                write!(f, "family {}: `{field}` does not fit the time scalar", family + 1)
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid instance: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    machines: u64,
    families: Vec<FamilyRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyRecord {
    id: i64,
    jobs: u64,
    proc: i64,
    setup: i64,
    gamma: i64,
    qualified: Vec<i64>,
}

/// Parses and validates an instance from its JSON text.
pub fn load_instance<T: Time>(text: &str) -> Result<Instance<T>, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut violations = Vec::new();
    let mut records = file.families;
    records.sort_by_key(|r| r.id);
    let ids: Vec<i64> = records.iter().map(|r| r.id).collect();
    if ids.iter().enumerate().any(|(i, &id)| id != i as i64 + 1) {
        violations.push(Violation::FamilyIds { expected: records.len(), found: ids });
    }

    let machines = file.machines as usize;
    let mut families = Vec::with_capacity(records.len());
    for (f, r) in records.into_iter().enumerate() {
        let mut time = |v: i64, field: &'static str| {
            T::from_i64(v).unwrap_or_else(|| {
                violations.push(Violation::OutOfRange { family: f, field });
                T::zero()
            })
        };
        let proc = time(r.proc, "proc");
        let setup = time(r.setup, "setup");
        let gamma = time(r.gamma, "gamma");
        let mut qualified = Vec::with_capacity(r.qualified.len());
        for m in r.qualified {
            if m < 1 || m as u64 > file.machines {
                violations.push(Violation::UnknownMachine {
                    family: f,
                    machine: (m.max(0) as usize).wrapping_sub(1),
                });
            } else {
                qualified.push(m as usize - 1);
            }
        }
        qualified.sort_unstable();
        families.push(Family { jobs: r.jobs as usize, proc, setup, gamma, qualified });
    }

    let inst = Instance { machines, families };
    violations.extend(inst.validate());
    if violations.is_empty() {
        Ok(inst)
    } else {
        Err(InstanceError::Invalid(violations))
    }
}

/// Serializes an instance to pretty-printed JSON.
pub fn save_instance<T: Time>(inst: &Instance<T>) -> String {
    let to_i64 = |v: T| v.to_i64().expect("time value does not fit the file format");
    let file = InstanceFile {
        machines: inst.machines as u64,
        families: inst
            .families
            .iter()
            .enumerate()
            .map(|(f, fam)| FamilyRecord {
                id: f as i64 + 1,
                jobs: fam.jobs as u64,
                proc: to_i64(fam.proc),
                setup: to_i64(fam.setup),
                gamma: to_i64(fam.gamma),
                qualified: fam.qualified.iter().map(|&m| m as i64 + 1).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
}

/// Parameters of the random instance generator. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub jobs: usize,
    pub machines: usize,
    pub families: usize,
    pub proc: (i64, i64),
    pub setup: (i64, i64),
    pub gamma: (i64, i64),
    /// Probability that a machine is qualified for a family.
    pub density: f64,
    pub seed: u64,
    /// Draws attempted before giving up on finding a feasible instance.
    pub max_attempts: usize,
}

impl GenConfig {
    pub fn new(jobs: usize, machines: usize, families: usize, seed: u64) -> Self {
        GenConfig {
            jobs,
            machines,
            families,
            proc: (1, 10),
            setup: (1, 5),
            gamma: (15, 60),
            density: 0.7,
            seed,
            max_attempts: 100,
        }
    }

    fn check(&self) -> Result<(), GenError> {
        let bad = |what: &str| Err(GenError::Config(what.to_string()));
        if self.jobs == 0 || self.machines == 0 || self.families == 0 {
            return bad("jobs, machines and families must be positive");
        }
        if self.families > self.jobs {
            return Err(GenError::TooManyFamilies { families: self.families, jobs: self.jobs });
        }
        if self.proc.0 < 1 || self.proc.0 > self.proc.1 {
            return bad("processing range must be non-empty and positive");
        }
        if self.setup.0 < 0 || self.setup.0 > self.setup.1 {
            return bad("setup range must be non-empty and non-negative");
        }
        if self.gamma.0 < 1 || self.gamma.0 > self.gamma.1 {
            return bad("threshold range must be non-empty and positive");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad("density must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("cannot split {jobs} jobs into {families} non-empty families")]
    TooManyFamilies { families: usize, jobs: usize },
    #[error("invalid generator configuration: {0}")]
    Config(String),
    #[error("no qualification-feasible instance found in {0} attempts")]
    Exhausted(usize),
    #[error("generated value does not fit the time scalar")]
    Overflow,
}

/// Seed used for the `attempt`-th draw of a configuration.
fn derived_seed(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Draws a random instance. Draws for which the qualification-centric
/// heuristic finds no schedule are rejected and redrawn from the next
/// derived seed.
pub fn generate_instance<T: Time>(cfg: &GenConfig) -> Result<Instance<T>, GenError> {
    cfg.check()?;
    for attempt in 0..cfg.max_attempts.max(1) {
        let inst = draw::<T>(cfg, derived_seed(cfg.seed, attempt))?;
        debug_assert!(inst.validate().is_empty());
        if heuristics::qualification_centric(&inst).is_some() {
            return Ok(inst);
        }
    }
    Err(GenError::Exhausted(cfg.max_attempts.max(1)))
}

fn draw<T: Time>(cfg: &GenConfig, seed: u64) -> Result<Instance<T>, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut counts = vec![1usize; cfg.families];
    for _ in cfg.families..cfg.jobs {
        counts[rng.gen_range(0..cfg.families)] += 1;
    }

    let machines: Vec<usize> = (0..cfg.machines).collect();
    let time = |v: i64| T::from_i64(v).ok_or(GenError::Overflow);
    let mut families = Vec::with_capacity(cfg.families);
    for &jobs in &counts {
        let proc = time(rng.gen_range(cfg.proc.0..=cfg.proc.1))?;
        let setup = time(rng.gen_range(cfg.setup.0..=cfg.setup.1))?;
        let gamma = time(rng.gen_range(cfg.gamma.0..=cfg.gamma.1))?;
        let mut qualified: Vec<usize> =
            machines.iter().copied().filter(|_| rng.gen_bool(cfg.density)).collect();
        if qualified.is_empty() {
            qualified.push(*machines.choose(&mut rng).expect("at least one machine"));
        }
        families.push(Family { jobs, proc, setup, gamma, qualified });
    }
    Ok(Instance { machines: cfg.machines, families })
}
