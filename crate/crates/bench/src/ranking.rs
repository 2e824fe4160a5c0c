//! Borda ranking and status contingency tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use num_rational::Ratio;
use thiserror::Error;

use crate::record::{RunRecord, RunStatus};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BordaScore {
    pub algorithm: String,
    pub score: Ratio<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("no record for algorithm {algorithm} on instance {instance}")]
    MissingPair { instance: String, algorithm: String },
    #[error("duplicate record for algorithm {algorithm} on instance {instance}")]
    Duplicate { instance: String, algorithm: String },
    #[error("instance sets differ: {0} has no counterpart")]
    Mismatch(String),
}

/// Position of a record in an instance's ranking: status first, then the
/// objective pair; a missing objective ranks after any present one.
fn answer_key(r: &RunRecord) -> (RunStatus, bool, Option<ptc::Objective>) {
    (r.status, r.objective.is_none(), r.objective)
}

fn by_instance(records: &[RunRecord]) -> Result<BTreeMap<&str, BTreeMap<&str, &RunRecord>>, RankError> {
    let mut map: BTreeMap<&str, BTreeMap<&str, &RunRecord>> = BTreeMap::new();
    for r in records {
        if map.entry(&r.instance).or_default().insert(&r.algorithm, r).is_some() {
            return Err(RankError::Duplicate { instance: r.instance.clone(), algorithm: r.algorithm.clone() });
        }
    }
    Ok(map)
}

/// Sum over instances of each algorithm's fractional rank; ascending, lower
/// is better, ties by label.
pub fn borda_ranking(records: &[RunRecord]) -> Result<Vec<BordaScore>, RankError> {
    let algorithms: BTreeSet<&str> = records.iter().map(|r| r.algorithm.as_str()).collect();
    let mut totals: BTreeMap<&str, Ratio<i64>> = algorithms.iter().map(|&a| (a, Ratio::from_integer(0))).collect();
    for (instance, runs) in by_instance(records)? {
        if let Some(&missing) = algorithms.iter().find(|a| !runs.contains_key(*a)) {
            return Err(RankError::MissingPair { instance: instance.to_string(), algorithm: missing.to_string() });
        }
        let mut order: Vec<&RunRecord> = runs.values().copied().collect();
        order.sort_by_key(|r| answer_key(r));
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && answer_key(order[j + 1]) == answer_key(order[i]) {
                j += 1;
            }
            // positions i+1 ..= j+1 share their mean
            let rank = Ratio::new((i + 1 + j + 1) as i64, 2);
            for r in &order[i..=j] {
                *totals.get_mut(r.algorithm.as_str()).expect("known algorithm") += rank;
            }
            i = j + 1;
        }
    }
    let mut scores: Vec<BordaScore> =
        totals.into_iter().map(|(a, score)| BordaScore { algorithm: a.to_string(), score }).collect();
    scores.sort_by(|a, b| a.score.cmp(&b.score).then_with(|| a.algorithm.cmp(&b.algorithm)));
    Ok(scores)
}

/// `table[x][y]`: instances with status `x` under A and `y` under B, in
/// OPT, SAT, UNK order.
pub fn contingency(a: &[RunRecord], b: &[RunRecord]) -> Result<[[usize; 3]; 3], RankError> {
    let index = |recs: &[RunRecord]| -> Result<BTreeMap<String, RunStatus>, RankError> {
        let mut map = BTreeMap::new();
        for r in recs {
            if map.insert(r.instance.clone(), r.status).is_some() {
                return Err(RankError::Duplicate { instance: r.instance.clone(), algorithm: r.algorithm.clone() });
            }
        }
        Ok(map)
    };
    let (ma, mb) = (index(a)?, index(b)?);
    if let Some(id) = ma.keys().find(|k| !mb.contains_key(*k)).or_else(|| mb.keys().find(|k| !ma.contains_key(*k))) {
        return Err(RankError::Mismatch(id.clone()));
    }
    let mut table = [[0usize; 3]; 3];
    for (id, sa) in &ma {
        table[sa.index()][mb[id].index()] += 1;
    }
    Ok(table)
}

/// Records of one algorithm.
pub fn select(records: &[RunRecord], algorithm: &str) -> Vec<RunRecord> {
    records.iter().filter(|r| r.algorithm == algorithm).cloned().collect()
}

fn ratio_text(r: &Ratio<i64>) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}", *r.numer() as f64 / *r.denom() as f64)
    }
}

pub fn format_borda(scores: &[BordaScore]) -> String {
    let mut out = String::from("algorithm,score\n");
    for s in scores {
        writeln!(out, "{},{}", s.algorithm, ratio_text(&s.score)).unwrap();
    }
    out
}

pub fn format_contingency(label_a: &str, label_b: &str, table: &[[usize; 3]; 3]) -> String {
    let mut out = format!("{label_a} \\ {label_b},OPT,SAT,UNK\n");
    for (x, row) in RunStatus::ALL.iter().zip(table) {
        writeln!(out, "{x},{},{},{}", row[0], row[1], row[2]).unwrap();
    }
    out
}
