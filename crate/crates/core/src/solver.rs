//! Exact branch and bound for the lexicographic objective: flow time first,
//! then the number of lost qualifications.
//!
//! Nodes hold one family sequence per machine. Machines are filled in index
//! order: a node either appends a job to the open machine or closes it and
//! moves on to the next one. Sequences are realized without idle time, which
//! loses nothing: idle never helps a start meet its qualification deadline,
//! and every schedule of optimal flow time is already packed. Each node
//! carries a [`DomainStore`] that is tightened by [`propagate`] before the
//! bound test.
//!
//! The second phase reruns the same search with the flow time fixed to the
//! optimum and the loss count as objective, with 0 as its only lower bound.

use std::time::{Duration, Instant};

use crate::filtering::{propagate, DomainStore, Inconsistency, RuleSet};
use crate::heuristics::{qualification_centric, scheduling_centric};
use crate::instance::Instance;
use crate::num::Time;
use crate::schedule::{count_disqualifications, left_pack, Schedule};

/// How the two objectives are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Aggregation {
    /// Two phases: flow time, then losses at optimal flow time.
    #[default]
    Lexicographic,
    /// One search on `W · flowtime + losses` with `W` above any loss count.
    WeightedSum,
}

impl Aggregation {
    /// Label letter: `L` or `S`.
    pub fn letter(self) -> char {
        match self {
            Aggregation::Lexicographic => 'L',
            Aggregation::WeightedSum => 'S',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'L' => Some(Aggregation::Lexicographic),
            'S' => Some(Aggregation::WeightedSum),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolverConfig {
    pub rules: RuleSet,
    pub aggregation: Aggregation,
    /// Wall-clock budget for the whole solve; `None` means unlimited.
    pub time_limit: Option<Duration>,
    /// Seed the incumbent with the better of the two heuristics.
    pub warm_start: bool,
    /// Budget on explored nodes; `None` means unlimited.
    pub node_limit: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rules: RuleSet::ALL,
            aggregation: Aggregation::Lexicographic,
            time_limit: Some(Duration::from_secs(300)),
            warm_start: false,
            node_limit: None,
        }
    }
}

impl SolverConfig {
    pub fn with_rules(rules: RuleSet) -> Self {
        SolverConfig { rules, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    /// Proven optimal.
    Optimal,
    /// A schedule was found, optimality unproven.
    Satisfiable,
    /// Limits hit before any schedule was found.
    Unknown,
    /// Proven to admit no schedule.
    Infeasible,
}

impl Status {
    pub fn code(self) -> &'static str {
        match self {
            Status::Optimal => "OPT",
            Status::Satisfiable => "SAT",
            Status::Unknown => "UNK",
            Status::Infeasible => "INFEASIBLE",
        }
    }
}

/// Objective pair, ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Objective<T> {
    pub flowtime: T,
    pub disqualifications: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SearchStats {
    pub nodes: u64,
    /// Nodes cut by propagation or by the bound.
    pub fails: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult<T> {
    pub status: Status,
    pub schedule: Option<Schedule<T>>,
    pub objective: Option<Objective<T>>,
    pub stats: SearchStats,
}

/// A search state: packed prefixes of every machine plus the bounds store.
#[derive(Debug, Clone)]
pub struct Node<T> {
    seqs: Vec<Vec<usize>>,
    /// First machine that is not closed.
    open: usize,
    clock: Vec<T>,
    last: Vec<Option<usize>>,
    /// `[machine][family]`
    last_start: Vec<Vec<Option<T>>>,
    machine_ft: Vec<T>,
    remaining: Vec<usize>,
    left: usize,
    store: DomainStore<T>,
}

impl<T: Time> Node<T> {
    pub fn root(inst: &Instance<T>) -> Self {
        let (nm, nf) = (inst.machines, inst.family_count());
        Node {
            seqs: vec![Vec::new(); nm],
            open: 0,
            clock: vec![T::zero(); nm],
            last: vec![None; nm],
            last_start: vec![vec![None; nf]; nm],
            machine_ft: vec![T::zero(); nm],
            remaining: inst.families.iter().map(|f| f.jobs).collect(),
            left: inst.job_count(),
            store: DomainStore::new(inst),
        }
    }

    pub fn sequences(&self) -> &[Vec<usize>] {
        &self.seqs
    }

    /// Machine receiving the next job, `None` once every machine is closed.
    pub fn open_machine(&self) -> Option<usize> {
        (self.open < self.seqs.len()).then_some(self.open)
    }

    /// Every job is sequenced.
    pub fn is_complete(&self) -> bool {
        self.left == 0
    }

    pub fn store(&self) -> &DomainStore<T> {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut DomainStore<T> {
        &mut self.store
    }

    /// Sum of the completions already fixed.
    pub fn fixed_flowtime(&self) -> T {
        self.machine_ft.iter().copied().sum()
    }

    /// Last completion over the sequenced jobs.
    pub fn horizon(&self) -> T {
        self.clock.iter().copied().fold(T::zero(), |a, b| a.max(b))
    }

    /// Losses of a complete node.
    pub fn disqualifications(&self, inst: &Instance<T>) -> usize {
        let horizon = self.horizon();
        let mut count = 0;
        for (f, fam) in inst.families.iter().enumerate() {
            for &m in &fam.qualified {
                let since = self.last_start[m][f].unwrap_or_else(T::zero);
                if horizon - since > fam.gamma {
                    count += 1;
                }
            }
        }
        count
    }

    /// Child with one job of `f` appended to the open machine. `None` if the
    /// machine cannot take it: not qualified, no job left, a store cap is
    /// reached, or the start would miss the qualification deadline.
    pub fn append(&self, inst: &Instance<T>, f: usize) -> Option<Node<T>> {
        let m = self.open_machine()?;
        if self.remaining[f] == 0 || !inst.is_qualified(f, m) {
            return None;
        }
        if self.store.family_jobs[m][f].hi <= self.store.assigned[m][f]
            || self.store.machine_jobs[m].hi <= self.store.assigned_total(m)
        {
            return None;
        }
        let fam = &inst.families[f];
        let start = match self.last[m] {
            Some(g) if g != f => self.clock[m] + fam.setup,
            _ => self.clock[m],
        };
        if start > self.last_start[m][f].unwrap_or_else(T::zero) + fam.gamma {
            return None;
        }
        let mut child = self.clone();
        let end = start + fam.proc;
        child.seqs[m].push(f);
        child.clock[m] = end;
        child.last[m] = Some(f);
        child.last_start[m][f] = Some(start);
        child.machine_ft[m] += end;
        child.remaining[f] -= 1;
        child.left -= 1;
        child.store.assign(m, f);
        Some(child)
    }

    /// Child where the open machine is finished. The last machine cannot be
    /// closed, and neither can one short of its lower job count.
    pub fn close(&self) -> Option<Node<T>> {
        let m = self.open_machine()?;
        if m + 1 >= self.seqs.len() || self.store.machine_jobs[m].lo > self.store.assigned_total(m) {
            return None;
        }
        let mut child = self.clone();
        child.open = m + 1;
        Some(child)
    }

    /// Writes the realized prefixes into the store, then propagates.
    pub fn propagate(&mut self, inst: &Instance<T>, rules: RuleSet) -> Result<(), Inconsistency> {
        for m in 0..self.seqs.len() {
            if m < self.open {
                self.store.close_machine(m, self.machine_ft[m])?;
            } else {
                self.store.raise_machine_flow(m, self.machine_ft[m])?;
            }
        }
        propagate(inst, &mut self.store, rules)
    }
}

/// Lower bound on the flow time of any completion of a propagated node.
pub fn lower_bound_lex<T: Time>(node: &Node<T>) -> T {
    let store = node.store();
    let machines = store
        .machine_flow
        .iter()
        .zip(&node.machine_ft)
        .fold(T::zero(), |acc, (b, &fixed)| acc.sat_add(b.lo.max(fixed)));
    machines.max(store.flowtime.lo)
}

#[derive(Debug, Clone, Copy)]
enum Goal<T> {
    Flowtime,
    Losses { flowtime: T },
    Weighted { weight: T },
}

#[derive(Debug, Clone)]
struct Incumbent<T> {
    flowtime: T,
    losses: usize,
    seqs: Vec<Vec<usize>>,
}

struct Search<'a, T: Time> {
    inst: &'a Instance<T>,
    cfg: &'a SolverConfig,
    order: Vec<usize>,
    /// Jobs per machine under an even split, rounded up.
    share: usize,
    started: Instant,
    stats: SearchStats,
    interrupted: bool,
    finished: bool,
    goal: Goal<T>,
    best: Option<Incumbent<T>>,
    observer: Option<&'a mut dyn FnMut(&DomainStore<T>)>,
}

impl<'a, T: Time> Search<'a, T> {
    fn weighted(&self, weight: T, flowtime: T, losses: usize) -> T {
        weight * flowtime + T::from_count(losses)
    }

    fn improves(&self, flowtime: T, losses: usize) -> bool {
        let Some(best) = &self.best else {
            return match self.goal {
                Goal::Losses { flowtime: target } => flowtime == target,
                _ => true,
            };
        };
        match self.goal {
            Goal::Flowtime => flowtime < best.flowtime,
            Goal::Losses { flowtime: target } => flowtime == target && losses < best.losses,
            Goal::Weighted { weight } => {
                self.weighted(weight, flowtime, losses) < self.weighted(weight, best.flowtime, best.losses)
            }
        }
    }

    /// Upper bound on the flow time of an improving leaf.
    fn flow_cap(&self) -> Option<T> {
        match (self.goal, &self.best) {
            (Goal::Losses { flowtime }, _) => Some(flowtime),
            (Goal::Flowtime, Some(b)) => Some(b.flowtime - T::one()),
            (Goal::Weighted { weight }, Some(b)) => {
                Some((self.weighted(weight, b.flowtime, b.losses) - T::one()).div_floor(&weight))
            }
            (_, None) => None,
        }
    }

    fn over_budget(&self) -> bool {
        self.cfg.node_limit.is_some_and(|n| self.stats.nodes >= n)
            || self.cfg.time_limit.is_some_and(|t| self.started.elapsed() >= t)
    }

    fn bound_prunes(&self, node: &Node<T>) -> bool {
        let lb = lower_bound_lex(node);
        match (self.goal, &self.best) {
            (Goal::Losses { flowtime }, _) => lb > flowtime,
            (Goal::Flowtime, Some(b)) => lb >= b.flowtime,
            (Goal::Weighted { weight }, Some(b)) => {
                weight * lb >= self.weighted(weight, b.flowtime, b.losses)
            }
            (_, None) => false,
        }
    }

    fn explore(&mut self, mut node: Node<T>) {
        if self.over_budget() {
            self.interrupted = true;
            return;
        }
        self.stats.nodes += 1;
        let capped = match self.flow_cap() {
            Some(cap) => node.store_mut().restrict_flowtime(cap).map(|_| ()),
            None => Ok(()),
        };
        let required = match self.goal {
            Goal::Losses { flowtime } => node.store_mut().require_flowtime(flowtime).map(|_| ()),
            _ => Ok(()),
        };
        if capped.and(required).and_then(|_| node.propagate(self.inst, self.cfg.rules)).is_err() {
            self.stats.fails += 1;
            return;
        }
        if let Some(observe) = self.observer.as_mut() {
            observe(node.store());
        }
        if self.bound_prunes(&node) {
            self.stats.fails += 1;
            return;
        }
        if node.is_complete() {
            let flowtime = node.fixed_flowtime();
            let losses = node.disqualifications(self.inst);
            if self.improves(flowtime, losses) {
                self.best = Some(Incumbent { flowtime, losses, seqs: node.seqs.clone() });
                if matches!(self.goal, Goal::Losses { .. }) && losses == 0 {
                    self.finished = true;
                }
            }
            return;
        }

        let m = node.open;
        let close_first = node.seqs[m].len() >= self.share;
        let close = node.close();
        if close_first {
            if let Some(child) = close.clone() {
                self.explore(child);
                if self.finished || self.interrupted {
                    return;
                }
            }
        }
        for i in 0..self.order.len() {
            if let Some(child) = node.append(self.inst, self.order[i]) {
                self.explore(child);
                if self.finished || self.interrupted {
                    return;
                }
            }
        }
        if !close_first {
            if let Some(child) = close {
                self.explore(child);
            }
        }
    }

    fn run(&mut self, goal: Goal<T>) {
        self.goal = goal;
        self.interrupted = false;
        self.finished = matches!(goal, Goal::Losses { .. }) && self.best.as_ref().is_some_and(|b| b.losses == 0);
        if !self.finished {
            self.explore(Node::root(self.inst));
        }
    }
}

fn warm_incumbent<T: Time>(inst: &Instance<T>) -> Option<Incumbent<T>> {
    [scheduling_centric(inst), qualification_centric(inst)]
        .into_iter()
        .flatten()
        .map(|s| Incumbent {
            flowtime: s.flowtime(),
            losses: count_disqualifications(inst, &s).count,
            seqs: s.sequences(),
        })
        .min_by_key(|inc| (inc.flowtime, inc.losses))
}

fn solve_inner<'a, T: Time>(
    inst: &'a Instance<T>,
    cfg: &'a SolverConfig,
    aggregation: Aggregation,
    observer: Option<&'a mut dyn FnMut(&DomainStore<T>)>,
) -> SolveResult<T> {
    let started = Instant::now();
    let mut search = Search {
        inst,
        cfg,
        order: inst.spt_order(),
        share: inst.job_count().div_ceil(inst.machines.max(1)),
        started,
        stats: SearchStats::default(),
        interrupted: false,
        finished: false,
        goal: Goal::Flowtime,
        best: if cfg.warm_start { warm_incumbent(inst) } else { None },
        observer,
    };

    let status = match aggregation {
        Aggregation::Lexicographic => {
            search.run(Goal::Flowtime);
            match (&search.best, search.interrupted) {
                (_, true) => None,
                (None, false) => Some(Status::Infeasible),
                (Some(b), false) => {
                    let flowtime = b.flowtime;
                    search.run(Goal::Losses { flowtime });
                    (!search.interrupted).then_some(Status::Optimal)
                }
            }
        }
        Aggregation::WeightedSum => {
            let weight = T::from_count(inst.qualified_pairs() + 1);
            search.run(Goal::Weighted { weight });
            match (&search.best, search.interrupted) {
                (_, true) => None,
                (None, false) => Some(Status::Infeasible),
                (Some(_), false) => Some(Status::Optimal),
            }
        }
    };
    let status = status.unwrap_or(if search.best.is_some() { Status::Satisfiable } else { Status::Unknown });

    let mut stats = search.stats;
    stats.elapsed = started.elapsed();
    let (schedule, objective) = match search.best {
        Some(b) => (
            Some(left_pack(inst, &b.seqs).expect("incumbent sequences cover the instance")),
            Some(Objective { flowtime: b.flowtime, disqualifications: b.losses }),
        ),
        None => (None, None),
    };
    SolveResult { status, schedule, objective, stats }
}

/// Lexicographic optimum: least flow time, then fewest losses.
pub fn solve_lex<T: Time>(inst: &Instance<T>, cfg: &SolverConfig) -> SolveResult<T> {
    solve_inner(inst, cfg, Aggregation::Lexicographic, None)
}

/// Minimizes `W · flowtime + losses` with `W` one more than the number of
/// qualified pairs, which yields the lexicographic optimum.
pub fn solve_weighted<T: Time>(inst: &Instance<T>, cfg: &SolverConfig) -> SolveResult<T> {
    solve_inner(inst, cfg, Aggregation::WeightedSum, None)
}

/// Dispatches on `cfg.aggregation`.
pub fn solve<T: Time>(inst: &Instance<T>, cfg: &SolverConfig) -> SolveResult<T> {
    solve_inner(inst, cfg, cfg.aggregation, None)
}

/// [`solve`] that also hands every store surviving propagation to `observer`.
pub fn solve_observed<T: Time>(
    inst: &Instance<T>,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&DomainStore<T>),
) -> SolveResult<T> {
    solve_inner(inst, cfg, cfg.aggregation, Some(observer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Family;
    use crate::schedule::check_validity;
    use crate::schedule::tests::ten_jobs;

    fn unlimited(rules: RuleSet) -> SolverConfig {
        SolverConfig { time_limit: None, ..SolverConfig::with_rules(rules) }
    }

    #[test]
    fn ten_job_lexicographic() {
        let inst = ten_jobs();
        let r = solve_lex(&inst, &unlimited(RuleSet::ALL));
        assert_eq!(r.status, Status::Optimal);
        let obj = r.objective.unwrap();
        assert_eq!(obj.flowtime, 114);
        assert!(obj.disqualifications <= 3);
        let s = r.schedule.unwrap();
        assert!(check_validity(&inst, &s).is_empty());
        assert_eq!(s.flowtime(), 114);
        assert_eq!(count_disqualifications(&inst, &s).count, obj.disqualifications);
    }

    #[test]
    fn weighted_matches_lexicographic() {
        let inst = ten_jobs();
        let lex = solve_lex(&inst, &unlimited(RuleSet::ALL));
        let sum = solve_weighted(&inst, &unlimited(RuleSet::ALL));
        assert_eq!(sum.status, Status::Optimal);
        assert_eq!(lex.objective, sum.objective);
    }

    #[test]
    fn counter_example_on_one_machine() {
        let inst = Instance::new(
            1,
            vec![Family::new(2, 11i64, 2, 1000, vec![0]), Family::new(3, 12, 9, 1000, vec![0])],
        );
        let r = solve_lex(&inst, &unlimited(RuleSet::ALL));
        assert_eq!(r.objective, Some(Objective { flowtime: 181, disqualifications: 0 }));
    }

    #[test]
    fn infeasible_toy() {
        let inst = Instance::new(1, vec![Family::new(2, 5i64, 0, 4, vec![0])]);
        for agg in [Aggregation::Lexicographic, Aggregation::WeightedSum] {
            let cfg = SolverConfig { aggregation: agg, ..unlimited(RuleSet::ALL) };
            let r = solve(&inst, &cfg);
            assert_eq!(r.status, Status::Infeasible);
            assert!(r.schedule.is_none() && r.objective.is_none());
        }
    }

    #[test]
    fn single_job() {
        let inst = Instance::new(2, vec![Family::new(1, 4i64, 1, 3, vec![0, 1])]);
        let lex = solve_lex(&inst, &unlimited(RuleSet::ALL));
        let sum = solve_weighted(&inst, &unlimited(RuleSet::ALL));
        // horizon 4 exceeds the threshold 3 on both machines
        assert_eq!(lex.objective, Some(Objective { flowtime: 4, disqualifications: 2 }));
        assert_eq!(lex.objective, sum.objective);
    }

    #[test]
    fn node_limit_interrupts() {
        let inst = ten_jobs();
        let cfg = SolverConfig { node_limit: Some(1), ..unlimited(RuleSet::NONE) };
        let r = solve_lex(&inst, &cfg);
        assert_eq!(r.status, Status::Unknown);
        let warm = SolverConfig { warm_start: true, ..cfg };
        let r = solve_lex(&inst, &warm);
        assert_eq!(r.status, Status::Satisfiable);
        assert!(r.objective.unwrap().flowtime >= 114);
    }

    #[test]
    fn root_bounds() {
        let inst = ten_jobs();
        let mut root = Node::root(&inst);
        root.propagate(&inst, RuleSet::NONE).unwrap();
        assert_eq!(lower_bound_lex(&root), 0);
        let mut root = Node::root(&inst);
        root.propagate(&inst, RuleSet::ALL).unwrap();
        assert!(lower_bound_lex(&root) <= 114);
    }

    #[test]
    fn complete_node_bound_is_exact() {
        let inst = ten_jobs();
        let mut node = Node::root(&inst);
        for f in [2, 2, 1, 1, 1] {
            node = node.append(&inst, f).unwrap();
        }
        node = node.close().unwrap();
        for f in [2, 2, 0, 0, 0] {
            node = node.append(&inst, f).unwrap();
        }
        assert!(node.is_complete());
        node.propagate(&inst, RuleSet::ALL).unwrap();
        assert_eq!(lower_bound_lex(&node), 114);
        assert_eq!(node.disqualifications(&inst), 3);
    }

    #[test]
    fn append_respects_thresholds_and_qualification() {
        let inst = ten_jobs();
        let root = Node::root(&inst);
        assert!(root.append(&inst, 0).is_none());
        let mut node = root.clone();
        for _ in 0..3 {
            node = node.append(&inst, 1).unwrap();
        }
        // f3's first start would be 19 + 1 = 19, within 21
        assert!(node.append(&inst, 2).is_some());
        assert!(root.close().is_some());
        assert!(root.close().unwrap().close().is_none());
    }

    #[test]
    fn deterministic() {
        let inst = ten_jobs();
        let a = solve_lex(&inst, &unlimited(RuleSet::ALL));
        let b = solve_lex(&inst, &unlimited(RuleSet::ALL));
        assert_eq!((a.status, a.objective, a.schedule, a.stats.nodes), (b.status, b.objective, b.schedule, b.stats.nodes));
    }
}
