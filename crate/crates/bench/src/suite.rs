//! Batch solving.

use std::fs;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;

use crate::label::AlgorithmLabel;
use crate::record::RunRecord;
use ptc::solver::solve;
use ptc::{load_instance, Instance};

/// Solves every instance with every algorithm, in parallel. Records come
/// back sorted by instance id, then label.
pub fn run_suite(
    instances: &[(String, Instance)],
    algorithms: &[AlgorithmLabel],
    time_limit: Option<Duration>,
) -> Vec<RunRecord> {
    let jobs: Vec<(&str, &Instance, AlgorithmLabel)> = instances
        .iter()
        .flat_map(|(id, inst)| algorithms.iter().map(move |a| (id.as_str(), inst, *a)))
        .collect();
    let mut records: Vec<RunRecord> = jobs
        .into_par_iter()
        .map(|(id, inst, label)| {
            let result = solve(inst, &label.config(time_limit));
            RunRecord::from_result(id, &label.to_string(), &result)
        })
        .collect();
    records.sort_by(|a, b| (&a.instance, &a.algorithm).cmp(&(&b.instance, &b.algorithm)));
    records
}

/// Instances of a directory: every `*.json` file, id = file stem, sorted.
/// Files that fail to load or validate come back as `(id, message)`.
pub fn load_dir(dir: &Path) -> std::io::Result<(Vec<(String, Instance)>, Vec<(String, String)>)> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for path in paths {
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|t| {
            load_instance::<i64>(&t).map_err(|e| e.to_string())
        }) {
            Ok(inst) => good.push((id, inst)),
            Err(msg) => bad.push((id, msg)),
        }
    }
    Ok((good, bad))
}
