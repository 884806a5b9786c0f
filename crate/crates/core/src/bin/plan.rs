use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;

use nolan::heuristics::RelaxedTask;
use nolan::landmarks::LandmarkGraph;
use nolan::search::format_plan;
use nolan::{lazy_gbfs, parse_sas, Config, Outcome, SearchLimits, SearchOptions};

const STATS_HELP: &str = "\
Statistics report (one key=value per line):
  config, outcome, solved, plan_length, expansions, evaluations_ff,
  evaluations_lm, novelty_queries, generated, registered, pruned, boosts,
  landmarks, novelty_fallback, peak_memory_bytes, runtime_s

Exit status: 0 solved, 1 unsolvable, 2 limit reached, 3 input error.";

/// Lazy greedy best-first planner for SAS+ tasks.
#[derive(Parser, Debug)]
#[command(name = "plan", after_help = STATS_HELP)]
struct Args {
    /// Translator output (SAS+ version 3).
    task: PathBuf,
    #[arg(long)]
    config: String,
    /// Seconds.
    #[arg(long, default_value_t = 300.0)]
    time_limit: f64,
    /// Bytes.
    #[arg(long, default_value_t = 8_589_934_592)]
    memory_limit: u64,
    #[arg(long)]
    max_expansions: Option<u64>,
    #[arg(long, default_value = "sas_plan")]
    plan_file: PathBuf,
    /// Statistics go to stdout when omitted.
    #[arg(long)]
    stats_file: Option<PathBuf>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    novelty_bound: u8,
    #[arg(long)]
    dump_landmarks: bool,
    #[arg(long)]
    dump_policy: bool,
}

fn main() -> ExitCode {
    let started = Instant::now();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let config = match Config::parse(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let text = match std::fs::read_to_string(&args.task) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.task.display());
            return ExitCode::from(3);
        }
    };
    let task = match parse_sas(&text) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.task.display());
            return ExitCode::from(3);
        }
    };
    if !(args.time_limit.is_finite() && args.time_limit >= 0.0) {
        eprintln!("error: invalid time limit {}", args.time_limit);
        return ExitCode::from(3);
    }

    if args.dump_policy {
        print!("{}", config.dump());
    }
    if args.dump_landmarks {
        let graph = LandmarkGraph::generate(&task, &RelaxedTask::new(&task));
        print!("{}", graph.dump(&task));
    }

    let options = SearchOptions {
        limits: SearchLimits {
            time: Some(Duration::from_secs_f64(args.time_limit).saturating_sub(started.elapsed())),
            memory_bytes: args.memory_limit,
            max_expansions: args.max_expansions,
        },
        novelty_bound: args.novelty_bound,
        record_trace: false,
    };
    let result = lazy_gbfs(&task, &config, &options);

    if let Some(plan) = &result.plan {
        if let Err(e) = std::fs::write(&args.plan_file, format_plan(&task, plan)) {
            eprintln!("error: cannot write {}: {e}", args.plan_file.display());
        }
    }
    let report = result.report(&config.name);
    match &args.stats_file {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &report) {
                eprintln!("error: cannot write {}: {e}", p.display());
            }
        }
        None => print!("{report}"),
    }

    ExitCode::from(match result.outcome {
        Outcome::Solved => 0,
        Outcome::UnsolvableUnderRelaxation | Outcome::Exhausted => 1,
        Outcome::TimeLimit | Outcome::MemoryLimit | Outcome::ExpansionLimit => 2,
    })
}
