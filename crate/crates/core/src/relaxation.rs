//! Optimal single-machine sequencing when qualification thresholds are ignored.
//!
//! An optimal sequence runs every family as one consolidated block. Blocks
//! behave like weighted jobs with processing time `P = s + k·p` and weight
//! `W = k`; every block after the first follows shortest-mean-processing-time
//! (SMPT) order, `P/W` ascending. Only the first block is special, because no
//! setup is paid at time 0. [`sequence_optimal`] therefore sorts by SMPT and
//! tries each block in front, evaluating each candidate in constant time.

use std::cmp::Ordering;

use num_rational::Ratio;

use crate::num::{triangular, Time};

/// Identity of a block.
///
/// `Relaxed(f)` stands for jobs of family `f` whose setup has been zeroed
/// when building lower bounds. They never merge with the real `Family(f)` block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKey {
    Family(usize),
    Relaxed(usize),
}

impl BlockKey {
    pub fn family(self) -> usize {
        match self {
            BlockKey::Family(f) | BlockKey::Relaxed(f) => f,
        }
    }

    /// Canonical tie-break: family id first, the real family before its relaxed copy.
    fn rank(self) -> (usize, bool) {
        match self {
            BlockKey::Family(f) => (f, false),
            BlockKey::Relaxed(f) => (f, true),
        }
    }
}

/// `count` identical jobs sharing a processing and a setup time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobGroup<T> {
    pub key: BlockKey,
    pub count: usize,
    pub proc: T,
    pub setup: T,
}

impl<T: Time> JobGroup<T> {
    pub fn family(family: usize, count: usize, proc: T, setup: T) -> Self {
        JobGroup { key: BlockKey::Family(family), count, proc, setup }
    }

    /// Zero-setup stand-ins for jobs of `family`.
    pub fn relaxed(family: usize, count: usize, proc: T) -> Self {
        JobGroup { key: BlockKey::Relaxed(family), count, proc, setup: T::zero() }
    }
}

/// A maximal run of same-key jobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block<T> {
    pub key: BlockKey,
    pub size: usize,
    pub proc: T,
    pub setup: T,
    /// Aggregate processing time `setup + size·proc`.
    pub total: T,
}

impl<T: Time> Block<T> {
    pub fn new(key: BlockKey, size: usize, proc: T, setup: T) -> Self {
        assert!(size >= 1, "a block holds at least one job");
        Block { key, size, proc, setup, total: setup + T::from_count(size) * proc }
    }

    pub fn weight(&self) -> T {
        T::from_count(self.size)
    }

    /// Mean processing time `total / size`, exact.
    pub fn mpt(&self) -> Ratio<T> {
        Ratio::new(self.total, self.weight())
    }

    /// SMPT comparison by cross-multiplication, ties by key.
    pub fn cmp_smpt(&self, other: &Self) -> Ordering {
        (self.total * other.weight())
            .cmp(&(other.total * self.weight()))
            .then_with(|| self.key.rank().cmp(&other.key.rank()))
    }

    /// Flow time contributed by the block's own jobs when it starts (setup
    /// included) at time 0.
    fn own_cost(&self) -> T {
        self.weight() * self.setup + self.proc * triangular::<T>(self.size)
    }
}

/// Groups jobs into one block per distinct key. Output order follows the first
/// appearance of each key.
pub fn build_blocks<T: Time>(groups: &[JobGroup<T>]) -> Vec<Block<T>> {
    let mut blocks: Vec<Block<T>> = Vec::new();
    for g in groups.iter().filter(|g| g.count > 0) {
        match blocks.iter_mut().find(|b| b.key == g.key) {
            Some(b) => {
                debug_assert!(b.proc == g.proc && b.setup == g.setup, "inconsistent job group");
                *b = Block::new(b.key, b.size + g.count, b.proc, b.setup);
            }
            None => blocks.push(Block::new(g.key, g.count, g.proc, g.setup)),
        }
    }
    blocks
}

/// Exact mean processing time of a block.
pub fn mpt<T: Time>(block: &Block<T>) -> Ratio<T> {
    block.mpt()
}

/// Flow time of the blocks run back to back from time 0, the first one
/// without its setup.
pub fn flowtime_of_block_sequence<T: Time>(seq: &[Block<T>]) -> T {
    let mut clock = T::zero();
    let mut flowtime = T::zero();
    for (i, b) in seq.iter().enumerate() {
        if i > 0 {
            clock += b.setup;
        }
        for _ in 0..b.size {
            clock += b.proc;
            flowtime += clock;
        }
    }
    flowtime
}

/// An ordered block sequence with its flow time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSequence<T> {
    pub blocks: Vec<Block<T>>,
    pub flowtime: T,
}

impl<T: Time> BlockSequence<T> {
    /// Family keys of every job, in sequence order.
    pub fn job_keys(&self) -> Vec<BlockKey> {
        self.blocks.iter().flat_map(|b| std::iter::repeat_n(b.key, b.size)).collect()
    }
}

/// Sorts blocks in SMPT order.
pub fn smpt_order<T: Time>(mut blocks: Vec<Block<T>>) -> Vec<Block<T>> {
    blocks.sort_by(Block::cmp_smpt);
    blocks
}

/// Flow time of each candidate obtained by moving block `k` of an
/// SMPT-sorted sequence to the front (`k = 0` is the sequence itself).
///
/// Moving block `k` ahead of `B_1..B_{k-1}` changes the flow time by
/// `P_k·ΣW_{<k} − W_k·ΣP_{<k}` for the swapped pairs, and the waived setup
/// switches from `s_1` to `s_k` for all `ΣW` jobs.
pub fn move_to_front_flowtimes<T: Time>(sorted: &[Block<T>]) -> Vec<T> {
    let Some(first) = sorted.first() else {
        return Vec::new();
    };
    let total_weight: T = sorted.iter().map(Block::weight).sum();

    let mut prefix_p = T::zero();
    let mut full = T::zero();
    for b in sorted {
        full += b.weight() * prefix_p + b.own_cost();
        prefix_p += b.total;
    }
    let base = full - first.setup * total_weight;

    let mut out = Vec::with_capacity(sorted.len());
    let (mut prefix_p, mut prefix_w) = (T::zero(), T::zero());
    for b in sorted {
        out.push(
            base + b.total * prefix_w - b.weight() * prefix_p - (b.setup - first.setup) * total_weight,
        );
        prefix_p += b.total;
        prefix_w += b.weight();
    }
    out
}

/// Minimum flow time sequence of a job multiset on one machine.
pub fn sequence_optimal<T: Time>(groups: &[JobGroup<T>]) -> BlockSequence<T> {
    let sorted = smpt_order(build_blocks(groups));
    let candidates = move_to_front_flowtimes(&sorted);
    let Some((best, &flowtime)) = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
    else {
        return BlockSequence { blocks: Vec::new(), flowtime: T::zero() };
    };
    let mut blocks = sorted;
    let front = blocks.remove(best);
    blocks.insert(0, front);
    BlockSequence { blocks, flowtime }
}

/// `FT*` of a job multiset: [`sequence_optimal`]'s flow time.
pub fn min_flowtime<T: Time>(groups: &[JobGroup<T>]) -> T {
    let sorted = smpt_order(build_blocks(groups));
    move_to_front_flowtimes(&sorted).into_iter().min().unwrap_or_else(T::zero)
}
