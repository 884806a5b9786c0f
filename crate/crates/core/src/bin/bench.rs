use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use nolan::bench::{self, ExpansionsFormula, ScoreReport, SuiteOptions};
use nolan::Config;

/// Runs planner configurations over a task suite and scores the results.
///
/// The score report goes to stdout, the CSV to `--out` or else to stderr.
#[derive(Parser, Debug)]
#[command(name = "bench")]
struct Args {
    /// One task path per line, optionally `domain<TAB>path`.
    #[arg(required_unless_present = "rescore")]
    manifest: Option<PathBuf>,
    /// Comma-separated configuration names.
    #[arg(long, value_delimiter = ',', default_value = "lama,nolan")]
    configs: Vec<String>,
    #[arg(long, default_value_t = 300.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 8_589_934_592)]
    memory_limit: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Planner binary; defaults to `plan` next to this executable.
    #[arg(long)]
    planner: Option<PathBuf>,
    /// Recompute the score report from a stored CSV without running anything.
    #[arg(long, conflicts_with = "manifest")]
    rescore: Option<PathBuf>,
    /// Use 1 - log(x)/log(U) for the expansions score.
    #[arg(long)]
    literal_footnote_formula: bool,
}

fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    let formula = if args.literal_footnote_formula {
        ExpansionsFormula::Literal
    } else {
        ExpansionsFormula::Normalized
    };
    let records = if let Some(csv) = &args.rescore {
        bench::read_csv(File::open(csv)?)?
    } else {
        let manifest = args.manifest.as_ref().expect("clap enforces a manifest");
        for c in &args.configs {
            Config::parse(c)?;
        }
        let text = std::fs::read_to_string(manifest)?;
        let base = manifest.parent().unwrap_or(Path::new("."));
        let entries = bench::parse_manifest(&text, base)?;
        let planner = match &args.planner {
            Some(p) => p.clone(),
            None => std::env::current_exe()?.with_file_name("plan"),
        };
        let mut opts = SuiteOptions::new(planner);
        opts.time_limit_s = args.time_limit;
        opts.memory_limit_bytes = args.memory_limit;
        opts.jobs = args.jobs;
        opts.formula = formula;
        let records = bench::run_suite(&entries, &args.configs, &opts)?;
        match &args.out {
            Some(p) => bench::write_csv(File::create(p)?, &records, formula)?,
            None => bench::write_csv(io::stderr(), &records, formula)?,
        }
        records
    };
    let report = ScoreReport::from_records(&records, formula);
    let mut out = io::stdout().lock();
    write!(out, "{report}")?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
