//! Five-letter algorithm labels.
//!
//! Letters, in order: model (always `N`, the native branch and bound),
//! heuristic warm start (`H` or `_`), rule set (`_`, `L`, `F`, `M`, `A`),
//! aggregation (`S` weighted sum, `L` lexicographic), objective priority
//! (always `F`, flow time first). `NHALF` is the full solver with warm start.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use ptc::solver::{Aggregation, SolverConfig};
use ptc::RuleSet;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlgorithmLabel {
    pub warm_start: bool,
    pub rules: RuleSet,
    pub aggregation: Aggregation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid algorithm label {label:?}: {reason}")]
pub struct LabelError {
    pub label: String,
    pub reason: &'static str,
}

impl AlgorithmLabel {
    pub fn new(warm_start: bool, rules: RuleSet, aggregation: Aggregation) -> Self {
        AlgorithmLabel { warm_start, rules, aggregation }
    }

    pub fn config(&self, time_limit: Option<Duration>) -> SolverConfig {
        SolverConfig {
            rules: self.rules,
            aggregation: self.aggregation,
            time_limit,
            warm_start: self.warm_start,
            node_limit: None,
        }
    }
}

impl fmt::Display for AlgorithmLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rules = self.rules.letter().unwrap_or('?');
        let warm = if self.warm_start { 'H' } else { '_' };
        write!(f, "N{warm}{rules}{}F", self.aggregation.letter())
    }
}

impl FromStr for AlgorithmLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| LabelError { label: s.to_string(), reason };
        let c: Vec<char> = s.chars().collect();
        if c.len() != 5 {
            return Err(err("expected five letters"));
        }
        if c[0] != 'N' {
            return Err(err("only model N is available"));
        }
        let warm_start = match c[1] {
            'H' => true,
            '_' => false,
            _ => return Err(err("second letter must be H or _")),
        };
        let rules = RuleSet::from_letter(c[2]).ok_or_else(|| err("third letter must be one of _ L F M A"))?;
        let aggregation = Aggregation::from_letter(c[3]).ok_or_else(|| err("fourth letter must be S or L"))?;
        if c[4] != 'F' {
            return Err(err("only flow-time priority F is available"));
        }
        Ok(AlgorithmLabel { warm_start, rules, aggregation })
    }
}

/// Labels listed one per line; blank lines and `#` comments are skipped.
pub fn parse_config_list(text: &str) -> Result<Vec<AlgorithmLabel>, LabelError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}
