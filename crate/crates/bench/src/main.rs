use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use ptc::solver::{solve, Aggregation, SolverConfig, Status};
use ptc::{generate_instance, load_instance, save_instance, save_schedule, GenConfig, Instance, RuleSet};
use ptc_bench::{
    borda_ranking, contingency, format_borda, format_contingency, load_dir, parse_config_list, read_csv, run_suite,
    select, write_csv, RunRecord,
};

#[derive(Parser)]
#[command(name = "ptc", version, about = "Scheduling with family setups and qualification thresholds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rules {
    #[value(alias = "_")]
    None,
    L,
    F,
    M,
    A,
}

impl From<Rules> for RuleSet {
    fn from(r: Rules) -> Self {
        match r {
            Rules::None => RuleSet::NONE,
            Rules::L => RuleSet::L,
            Rules::F => RuleSet::F,
            Rules::M => RuleSet::M,
            Rules::A => RuleSet::ALL,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Agg {
    Lex,
    Sum,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "A", ignore_case = true)]
        rules: Rules,
        #[arg(long, value_enum, default_value = "lex")]
        agg: Agg,
        /// Start from the heuristic incumbent.
        #[arg(long)]
        warm: bool,
        /// Seconds; 0 disables the limit.
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Write the best schedule here as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a random feasible instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        f: usize,
        #[arg(long, default_value_t = 0.7)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every algorithm of a label list on every instance of a directory.
    Bench {
        dir: PathBuf,
        /// One algorithm label per line, e.g. N_ALF.
        #[arg(long)]
        configs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
    },
    /// Borda scores of a results file.
    Rank { results: PathBuf },
    /// Status table of two algorithms of a results file.
    Contingency {
        results: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
}

/// Failure with its process exit code.
enum Failure {
    Usage(String),
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Internal(m) => m,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}

fn limit(seconds: f64) -> Result<Option<Duration>, Failure> {
    if !(seconds >= 0.0 && seconds.is_finite()) {
        return Err(Failure::Usage(format!("invalid time limit {seconds}")));
    }
    Ok((seconds > 0.0).then(|| Duration::from_secs_f64(seconds)))
}

fn load(path: &Path) -> Result<Instance, Failure> {
    load_instance(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { instance, rules, agg, warm, time_limit, node_limit, out } => {
            let inst = load(&instance)?;
            let cfg = SolverConfig {
                rules: rules.into(),
                aggregation: match agg {
                    Agg::Lex => Aggregation::Lexicographic,
                    Agg::Sum => Aggregation::WeightedSum,
                },
                time_limit: limit(time_limit)?,
                warm_start: warm,
                node_limit,
            };
            let r = solve(&inst, &cfg);
            println!("status: {}", r.status.code());
            if let Some(o) = r.objective {
                println!("flowtime: {}", o.flowtime);
                println!("disqualifications: {}", o.disqualifications);
            }
            println!("nodes: {}", r.stats.nodes);
            println!("fails: {}", r.stats.fails);
            println!("time_s: {:.3}", r.stats.elapsed.as_secs_f64());
            if let (Some(path), Some(s)) = (out, &r.schedule) {
                write(&path, &save_schedule(s))?;
            }
            if r.status == Status::Infeasible {
                return Err(Failure::Input("instance admits no qualification-feasible schedule".into()));
            }
        }
        Command::Generate { n, m, f, density, seed, out } => {
            let cfg = GenConfig { density, ..GenConfig::new(n, m, f, seed) };
            let inst: Instance = generate_instance(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
            let text = save_instance(&inst);
            match out {
                Some(path) => write(&path, &text)?,
                None => println!("{text}"),
            }
        }
        Command::Bench { dir, configs, out, time_limit } => {
            let labels = parse_config_list(&read(&configs)?).map_err(|e| Failure::Usage(e.to_string()))?;
            let (instances, broken) =
                load_dir(&dir).map_err(|e| Failure::Usage(format!("cannot list {}: {e}", dir.display())))?;
            let mut records = run_suite(&instances, &labels, limit(time_limit)?);
            for (id, msg) in &broken {
                eprintln!("warning: skipping {id}: {msg}");
                records.extend(labels.iter().map(|l| RunRecord::unknown(id, &l.to_string())));
            }
            records.sort_by(|a, b| (&a.instance, &a.algorithm).cmp(&(&b.instance, &b.algorithm)));
            write(&out, &write_csv(&records))?;
            eprintln!("{} records written to {}", records.len(), out.display());
        }
        Command::Rank { results } => {
            let records = read_csv(&read(&results)?).map_err(|e| Failure::Input(e.to_string()))?;
            let scores = borda_ranking(&records).map_err(|e| Failure::Input(e.to_string()))?;
            print!("{}", format_borda(&scores));
        }
        Command::Contingency { results, a, b } => {
            let records = read_csv(&read(&results)?).map_err(|e| Failure::Input(e.to_string()))?;
            let (ra, rb) = (select(&records, &a), select(&records, &b));
            for (label, recs) in [(&a, &ra), (&b, &rb)] {
                if recs.is_empty() {
                    return Err(Failure::Usage(format!("no records for algorithm {label}")));
                }
            }
            let table = contingency(&ra, &rb).map_err(|e| Failure::Input(e.to_string()))?;
            print!("{}", format_contingency(&a, &b, &table));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
        Err(_) => ExitCode::from(3),
    }
}
