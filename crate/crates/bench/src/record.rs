//! Run records and their CSV form.
//!
//! Columns: `instance,algorithm,status,flowtime,disq,time_s,nodes,fails`.
//! An instance proven infeasible is written with status `OPT` and `-` in both
//! objective columns; `UNK` leaves them empty.

use std::fmt;
use std::str::FromStr;

use ptc::solver::Status;
use ptc::SolveResult;
use ptc::Objective;
use thiserror::Error;

/// Outcome class of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RunStatus {
    Opt,
    Sat,
    Unk,
}

impl RunStatus {
    pub const ALL: [RunStatus; 3] = [RunStatus::Opt, RunStatus::Sat, RunStatus::Unk];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::Opt => "OPT",
            RunStatus::Sat => "SAT",
            RunStatus::Unk => "UNK",
        })
    }
}

impl FromStr for RunStatus {
    type Err = RecordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "OPT" => Ok(RunStatus::Opt),
            "SAT" => Ok(RunStatus::Sat),
            "UNK" => Ok(RunStatus::Unk),
            _ => Err(RecordError::Field { line: 0, field: "status", value: s.to_string() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub algorithm: String,
    pub status: RunStatus,
    /// `None` with `Opt` means proven infeasible; always `None` with `Unk`.
    pub objective: Option<Objective>,
    pub time_s: f64,
    pub nodes: u64,
    pub fails: u64,
}

impl RunRecord {
    pub fn from_result(instance: &str, algorithm: &str, r: &SolveResult) -> Self {
        let status = match r.status {
            Status::Optimal | Status::Infeasible => RunStatus::Opt,
            Status::Satisfiable => RunStatus::Sat,
            Status::Unknown => RunStatus::Unk,
        };
        RunRecord {
            instance: instance.to_string(),
            algorithm: algorithm.to_string(),
            status,
            objective: r.objective,
            time_s: r.stats.elapsed.as_secs_f64(),
            nodes: r.stats.nodes,
            fails: r.stats.fails,
        }
    }

    /// Placeholder for a run that could not take place.
    pub fn unknown(instance: &str, algorithm: &str) -> Self {
        RunRecord {
            instance: instance.to_string(),
            algorithm: algorithm.to_string(),
            status: RunStatus::Unk,
            objective: None,
            time_s: 0.0,
            nodes: 0,
            fails: 0,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.status == RunStatus::Opt && self.objective.is_none()
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: bad {field} value {value:?}")]
    Field { line: u64, field: &'static str, value: String },
    #[error("line {line}: expected 8 columns, found {found}")]
    Columns { line: u64, found: usize },
    #[error("unexpected CSV header")]
    Header,
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub const HEADER: [&str; 8] = ["instance", "algorithm", "status", "flowtime", "disq", "time_s", "nodes", "fails"];

/// Writes records in the given order.
pub fn write_csv(records: &[RunRecord]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in records {
        let (flowtime, disq) = match (r.status, r.objective) {
            (_, Some(o)) => (o.flowtime.to_string(), o.disqualifications.to_string()),
            (RunStatus::Opt, None) => ("-".to_string(), "-".to_string()),
            (_, None) => (String::new(), String::new()),
        };
        w.write_record([
            r.instance.as_str(),
            r.algorithm.as_str(),
            &r.status.to_string(),
            &flowtime,
            &disq,
            &format!("{:.3}", r.time_s),
            &r.nodes.to_string(),
            &r.fails.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
}

pub fn read_csv(text: &str) -> Result<Vec<RunRecord>, RecordError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    if rd.headers()?.iter().ne(HEADER) {
        return Err(RecordError::Header);
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 8 {
            return Err(RecordError::Columns { line, found: row.len() });
        }
        let bad = |field: &'static str, value: &str| RecordError::Field { line, field, value: value.to_string() };
        let status: RunStatus = row[2].parse().map_err(|_| bad("status", &row[2]))?;
        let objective = match (&row[3], &row[4]) {
            ("", "") if status == RunStatus::Unk => None,
            ("-", "-") if status == RunStatus::Opt => None,
            (ft, d) => Some(Objective {
                flowtime: ft.parse().map_err(|_| bad("flowtime", ft))?,
                disqualifications: d.parse().map_err(|_| bad("disq", d))?,
            }),
        };
        if status == RunStatus::Unk && objective.is_some() {
            return Err(bad("flowtime", &row[3]));
        }
        out.push(RunRecord {
            instance: row[0].to_string(),
            algorithm: row[1].to_string(),
            status,
            objective,
            time_s: row[5].parse().map_err(|_| bad("time_s", &row[5]))?,
            nodes: row[6].parse().map_err(|_| bad("nodes", &row[6]))?,
            fails: row[7].parse().map_err(|_| bad("fails", &row[7]))?,
        });
    }
    Ok(out)
}
