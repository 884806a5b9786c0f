//! Suite runner and IPC-style scores.
//!
//! Each (task, config) pair runs the `plan` binary in its own process under an
//! address-space limit and a wall-clock deadline. Results are written as CSV
//! rows in manifest order × config order.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TIME_UPPER_S: f64 = 300.0;
pub const TIME_LOWER_S: f64 = 1.0;
pub const EXPANSIONS_UPPER: f64 = 1e6;
pub const EXPANSIONS_LOWER: f64 = 100.0;

pub const CSV_HEADER: [&str; 9] = [
    "domain",
    "task",
    "config",
    "solved",
    "runtime_s",
    "expansions",
    "plan_length",
    "agile_score",
    "expansions_score",
];

/// Which interpolation the expansions score uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpansionsFormula {
    /// `1 - log(x/L)/log(U/L)`: exactly 1 at the lower bound.
    #[default]
    Normalized,
    /// `1 - log(x)/log(U)` between the bounds.
    Literal,
}

pub fn agile_score(t: f64, solved: bool) -> f64 {
    if !solved || t >= TIME_UPPER_S {
        0.0
    } else if t <= TIME_LOWER_S {
        1.0
    } else {
        1.0 - t.ln() / TIME_UPPER_S.ln()
    }
}

pub fn expansions_score(x: u64, solved: bool) -> f64 {
    expansions_score_with(x, solved, ExpansionsFormula::Normalized)
}

pub fn expansions_score_with(x: u64, solved: bool, formula: ExpansionsFormula) -> f64 {
    let x = x as f64;
    if !solved || x >= EXPANSIONS_UPPER {
        0.0
    } else if x <= EXPANSIONS_LOWER {
        1.0
    } else {
        match formula {
            ExpansionsFormula::Normalized => {
                1.0 - (x / EXPANSIONS_LOWER).ln() / (EXPANSIONS_UPPER / EXPANSIONS_LOWER).ln()
            }
            ExpansionsFormula::Literal => 1.0 - x.ln() / EXPANSIONS_UPPER.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub domain: String,
    pub task: String,
    pub config: String,
    pub solved: bool,
    pub runtime_s: f64,
    pub expansions: u64,
    pub plan_length: Option<u64>,
}

impl RunRecord {
    pub fn agile_score(&self) -> f64 {
        agile_score(self.runtime_s, self.solved)
    }

    pub fn expansions_score(&self, formula: ExpansionsFormula) -> f64 {
        expansions_score_with(self.expansions, self.solved, formula)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    domain: String,
    task: String,
    config: String,
    solved: u8,
    runtime_s: f64,
    expansions: u64,
    plan_length: Option<u64>,
    agile_score: f64,
    expansions_score: f64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected CSV header: {0}")]
    Header(String),
    #[error("manifest line {line}: {msg}")]
    Manifest { line: usize, msg: String },
}

pub fn write_csv<W: Write>(out: W, records: &[RunRecord], formula: ExpansionsFormula) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(CsvRow {
            domain: r.domain.clone(),
            task: r.task.clone(),
            config: r.config.clone(),
            solved: u8::from(r.solved),
            runtime_s: r.runtime_s,
            expansions: r.expansions,
            plan_length: r.plan_length,
            agile_score: r.agile_score(),
            expansions_score: r.expansions_score(formula),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads records back; stored score columns are ignored and recomputed.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRecord>, BenchError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(BenchError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    r.deserialize::<CsvRow>()
        .map(|row| {
            let row = row?;
            Ok(RunRecord {
                domain: row.domain,
                task: row.task,
                config: row.config,
                solved: row.solved != 0,
                runtime_s: row.runtime_s,
                expansions: row.expansions,
                plan_length: row.plan_length,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Totals {
    pub coverage: u64,
    pub agile_score: f64,
    pub expansions_score: f64,
}

impl Totals {
    fn add(&mut self, r: &RunRecord, formula: ExpansionsFormula) {
        self.coverage += u64::from(r.solved);
        self.agile_score += r.agile_score();
        self.expansions_score += r.expansions_score(formula);
    }
}

impl fmt::Display for Totals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "coverage={} agile_score={} expansions_score={}",
            self.coverage, self.agile_score, self.expansions_score
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigScores {
    pub config: String,
    pub total: Totals,
    /// Per-domain totals, in first-appearance order.
    pub domains: Vec<(String, Totals)>,
}

/// Totals per config (first-appearance order), summed in record order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreReport {
    pub configs: Vec<ConfigScores>,
}

impl ScoreReport {
    pub fn from_records(records: &[RunRecord], formula: ExpansionsFormula) -> Self {
        let mut configs: Vec<ConfigScores> = Vec::new();
        for r in records {
            let c = match configs.iter().position(|c| c.config == r.config) {
                Some(i) => &mut configs[i],
                None => {
                    configs.push(ConfigScores {
                        config: r.config.clone(),
                        total: Totals::default(),
                        domains: Vec::new(),
                    });
                    configs.last_mut().expect("just pushed")
                }
            };
            c.total.add(r, formula);
            let d = match c.domains.iter().position(|(d, _)| *d == r.domain) {
                Some(i) => i,
                None => {
                    c.domains.push((r.domain.clone(), Totals::default()));
                    c.domains.len() - 1
                }
            };
            c.domains[d].1.add(r, formula);
        }
        ScoreReport { configs }
    }
}

impl fmt::Display for ScoreReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.configs {
            writeln!(f, "config={} {}", c.config, c.total)?;
            for (d, t) in &c.domains {
                writeln!(f, "  domain={d} {t}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub domain: String,
    /// Path as written in the manifest.
    pub task: String,
    /// Path used to run the task.
    pub path: PathBuf,
}

/// One task per line, either `path` or `domain<TAB>path`. Blank lines and
/// `#` comments are skipped. Relative paths are taken from `base`; a missing
/// domain defaults to the name of the task's parent directory.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>, BenchError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (domain, task) = match line.split_once('\t') {
            Some((d, t)) => (Some(d.trim().to_string()), t.trim()),
            None => (None, line),
        };
        if task.is_empty() {
            return Err(BenchError::Manifest {
                line: i + 1,
                msg: "missing task path".into(),
            });
        }
        let path = base.join(task);
        let domain = domain.unwrap_or_else(|| {
            Path::new(task)
                .parent()
                .and_then(Path::file_name)
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
        out.push(ManifestEntry {
            domain,
            task: task.to_string(),
            path,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub planner: PathBuf,
    pub time_limit_s: f64,
    pub memory_limit_bytes: u64,
    /// Extra address space granted on top of the search budget.
    pub address_space_slack: u64,
    /// Wall-clock slack before the child is killed.
    pub grace: Duration,
    pub jobs: usize,
    pub formula: ExpansionsFormula,
}

impl SuiteOptions {
    pub fn new(planner: impl Into<PathBuf>) -> Self {
        SuiteOptions {
            planner: planner.into(),
            time_limit_s: TIME_UPPER_S,
            memory_limit_bytes: 8 << 30,
            address_space_slack: 512 << 20,
            grace: Duration::from_secs(5),
            jobs: 1,
            formula: ExpansionsFormula::Normalized,
        }
    }
}

/// Parses a flat `key=value` statistics report.
pub fn parse_stats(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

fn run_one(entry: &ManifestEntry, config: &str, opts: &SuiteOptions, scratch: &Path, slot: usize) -> RunRecord {
    let mut record = RunRecord {
        domain: entry.domain.clone(),
        task: entry.task.clone(),
        config: config.to_string(),
        solved: false,
        runtime_s: 0.0,
        expansions: 0,
        plan_length: None,
    };
    let stats_path = scratch.join(format!("run{slot}.stats"));
    let plan_path = scratch.join(format!("run{slot}.plan"));
    let _ = std::fs::remove_file(&stats_path);
    let mut cmd = Command::new(&opts.planner);
    cmd.arg(&entry.path)
        .args(["--config", config])
        .args(["--time-limit", &opts.time_limit_s.to_string()])
        .args(["--memory-limit", &opts.memory_limit_bytes.to_string()])
        .arg("--stats-file")
        .arg(&stats_path)
        .arg("--plan-file")
        .arg(&plan_path)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null());
    limit_address_space(&mut cmd, opts.memory_limit_bytes.saturating_add(opts.address_space_slack));

    let start = Instant::now();
    let deadline = Duration::from_secs_f64(opts.time_limit_s.max(0.0)) + opts.grace;
    let status = cmd.spawn().and_then(|mut child| loop {
        if let Some(status) = child.try_wait()? {
            break Ok(Some(status));
        }
        if start.elapsed() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            break Ok(None);
        }
        std::thread::sleep(Duration::from_millis(5));
    });
    record.runtime_s = start.elapsed().as_secs_f64();

    let stats = std::fs::read_to_string(&stats_path).map(|t| parse_stats(&t)).unwrap_or_default();
    record.expansions = stats.get("expansions").and_then(|v| v.parse().ok()).unwrap_or(0);
    let exited_solved = matches!(status, Ok(Some(s)) if s.code() == Some(0));
    if exited_solved && stats.get("solved").map(String::as_str) == Some("1") {
        record.solved = true;
        record.plan_length = stats.get("plan_length").and_then(|v| v.parse().ok());
    }
    record
}

#[cfg(unix)]
fn limit_address_space(cmd: &mut Command, bytes: u64) {
    use std::os::unix::process::CommandExt;
    let limit = libc::rlimit {
        rlim_cur: bytes as libc::rlim_t,
        rlim_max: bytes as libc::rlim_t,
    };
    // SAFETY: setrlimit is async-signal-safe and touches no shared state.
    unsafe {
        cmd.pre_exec(move || {
            if libc::setrlimit(libc::RLIMIT_AS, &limit) != 0 {
                return Err(io::Error::last_os_error());
            }
            Ok(())
        });
    }
}

#[cfg(not(unix))]
fn limit_address_space(_cmd: &mut Command, _bytes: u64) {}

/// Runs every (task, config) pair, `opts.jobs` at a time. Failures of single
/// runs become unsolved rows.
pub fn run_suite(manifest: &[ManifestEntry], configs: &[String], opts: &SuiteOptions) -> io::Result<Vec<RunRecord>> {
    let jobs: Vec<(usize, usize)> = (0..manifest.len())
        .flat_map(|t| (0..configs.len()).map(move |c| (t, c)))
        .collect();
    let scratch = tempfile::Builder::new().prefix("nolan-bench").tempdir()?;
    let results: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..opts.jobs.max(1).min(jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(t, c)) = jobs.get(i) else { break };
                let r = run_one(&manifest[t], &configs[c], opts, scratch.path(), i);
                results.lock().expect("no poisoned workers")[i] = Some(r);
            });
        }
    });
    Ok(results
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect())
}
