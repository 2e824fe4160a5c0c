//! Experiment harness around the `ptc` solver: algorithm labels, batch runs,
//! CSV reports, Borda ranking and status contingency tables.

pub mod label;
pub mod ranking;
pub mod record;
pub mod suite;

pub use label::{parse_config_list, AlgorithmLabel, LabelError};
pub use ranking::{borda_ranking, contingency, format_borda, format_contingency, select, BordaScore, RankError};
pub use record::{read_csv, write_csv, RecordError, RunRecord, RunStatus};
pub use suite::{load_dir, run_suite};
