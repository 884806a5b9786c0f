//! Greedy best-first search with deferred evaluation.
//!
//! Successors are queued under their parent's heuristic values and evaluated
//! when popped. Novelty is computed once per insertion, with the partition
//! taken from the parent's values. Goals are tested on pop; duplicates are
//! never reopened.

pub mod plan;
pub mod registry;
pub mod successor;

use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;

pub use plan::{format_plan, validate_plan, PlanCheck};
pub use registry::{MemoryLimit, StateId, StateRegistry};
pub use successor::{apply_operator, applicable_operators, InapplicableOperator, SuccessorGenerator};

use crate::config::Config;
use crate::heuristics::{DeleteRelaxation, RelaxedTask};
use crate::landmarks::{LandmarkGraph, LandmarkStatus};
use crate::novelty::NoveltyTable;
use crate::open_list::{Heuristic, KeyComponent, OpenPolicy};
use crate::sas::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// Counted from the start of [`lazy_gbfs`], preprocessing included.
    pub time: Option<Duration>,
    /// Whole-process budget; the search gets what is left once the task and
    /// its preprocessing are resident.
    pub memory_bytes: u64,
    pub max_expansions: Option<u64>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            time: Some(Duration::from_secs(300)),
            memory_bytes: 8 << 30,
            max_expansions: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub limits: SearchLimits,
    pub novelty_bound: u8,
    /// Keep the sequence of expanded states in the result.
    pub record_trace: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            limits: SearchLimits::default(),
            novelty_bound: 2,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Solved,
    /// The initial state is a dead end of the delete relaxation.
    UnsolvableUnderRelaxation,
    /// Open lists ran dry; with dead-end pruning this is not a proof.
    Exhausted,
    TimeLimit,
    MemoryLimit,
    ExpansionLimit,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Solved => "solved",
            Outcome::UnsolvableUnderRelaxation => "proven-unsolvable-under-relaxation",
            Outcome::Exhausted => "exhausted",
            Outcome::TimeLimit => "time-limit",
            Outcome::MemoryLimit => "memory-limit",
            Outcome::ExpansionLimit => "expansion-limit",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Statistics {
    pub expansions: u64,
    pub evaluations_ff: u64,
    pub evaluations_lm: u64,
    pub novelty_queries: u64,
    pub generated: u64,
    pub registered: u64,
    pub pruned: u64,
    pub boosts: u64,
    pub landmarks: usize,
    pub novelty_fallback: bool,
    pub peak_memory_bytes: u64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub plan: Option<Vec<usize>>,
    pub stats: Statistics,
    pub trace: Vec<StateId>,
}

impl SearchResult {
    /// Flat `key=value` report. `runtime_s` is the only wall-clock field.
    pub fn report(&self, config: &str) -> String {
        let s = &self.stats;
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn fmt::Display| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("config", &config);
        kv("outcome", &self.outcome);
        kv("solved", &u8::from(self.outcome == Outcome::Solved));
        kv(
            "plan_length",
            &self.plan.as_ref().map_or(String::new(), |p| p.len().to_string()),
        );
        kv("expansions", &s.expansions);
        kv("evaluations_ff", &s.evaluations_ff);
        kv("evaluations_lm", &s.evaluations_lm);
        kv("novelty_queries", &s.novelty_queries);
        kv("generated", &s.generated);
        kv("registered", &s.registered);
        kv("pruned", &s.pruned);
        kv("boosts", &s.boosts);
        kv("landmarks", &s.landmarks);
        kv("novelty_fallback", &u8::from(s.novelty_fallback));
        kv("peak_memory_bytes", &s.peak_memory_bytes);
        kv("runtime_s", &s.runtime_s);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Generated,
    Expanded,
    Pruned,
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    parent: u32,
    op: u32,
    g: u32,
    status: Status,
    h_ff: u32,
    h_lm: u32,
    preferred: bool,
}

/// Operator sequence along parent links, initial state first.
fn extract(nodes: &[Node], goal: StateId) -> Vec<usize> {
    let mut plan = Vec::new();
    let mut cur = goal.0;
    while nodes[cur as usize].parent != NONE {
        plan.push(nodes[cur as usize].op as usize);
        cur = nodes[cur as usize].parent;
    }
    plan.reverse();
    plan
}

struct Evaluation {
    h_ff: Option<u32>,
    h_lm: u32,
    preferred_ff: Vec<usize>,
    lm_status: Option<LandmarkStatus>,
}

struct Search<'a> {
    task: &'a Task,
    config: &'a Config,
    options: SearchOptions,
    /// Memory limit left after the task and preprocessing.
    budget: u64,
    relaxation: DeleteRelaxation,
    landmarks: Option<LandmarkGraph>,
    generator: SuccessorGenerator,
    registry: StateRegistry,
    nodes: Vec<Node>,
    lm_status: Vec<Option<LandmarkStatus>>,
    lm_status_bytes: u64,
    policy: OpenPolicy,
    partitions: Vec<Vec<Heuristic>>,
    novelty: Vec<NoveltyTable>,
    stats: Statistics,
    trace: Vec<StateId>,
}

impl<'a> Search<'a> {
    fn evaluate(&mut self, id: StateId, values: &[usize]) -> Evaluation {
        let report = self.relaxation.hff(self.task, values);
        self.stats.evaluations_ff += 1;
        let mut eval = Evaluation {
            h_ff: report.value,
            h_lm: 0,
            preferred_ff: report.preferred,
            lm_status: None,
        };
        if let Some(graph) = &self.landmarks {
            let parent = self.nodes[id.index()].parent;
            let (value, status) = if parent == NONE {
                graph.evaluate(&LandmarkStatus::empty(graph), values)
            } else {
                let p = self.lm_status[parent as usize]
                    .as_ref()
                    .expect("parents are evaluated before their children");
                graph.evaluate(p, values)
            };
            self.stats.evaluations_lm += 1;
            eval.h_lm = value;
            eval.lm_status = Some(status);
        }
        eval
    }

    fn store_evaluation(&mut self, id: StateId, eval: &mut Evaluation) {
        let node = &mut self.nodes[id.index()];
        node.h_ff = eval.h_ff.unwrap_or(u32::MAX);
        node.h_lm = eval.h_lm;
        if let Some(status) = eval.lm_status.take() {
            if self.lm_status.len() <= id.index() {
                self.lm_status.resize(id.index() + 1, None);
            }
            if self.lm_status[id.index()].is_none() {
                self.lm_status_bytes += status.memory_bytes() as u64;
                self.lm_status[id.index()] = Some(status);
            }
        }
    }

    /// Inserts a freshly registered state; keys come from `parent_h`.
    fn insert(&mut self, id: StateId, values: &[usize], parent_h: (u32, u32)) {
        let node = &self.nodes[id.index()];
        let (g, preferred) = (node.g, node.preferred);
        let atoms: Vec<usize> = values
            .iter()
            .enumerate()
            .map(|(v, &x)| self.task.atoms().offset(v) + x)
            .collect();
        let mut w: Vec<Option<u32>> = vec![None; self.novelty.len()];
        let h_of = |h: Heuristic| match h {
            Heuristic::Ff => parent_h.0,
            Heuristic::Lm => parent_h.1,
        };
        let partitions = &self.partitions;
        let novelty = &mut self.novelty;
        let stats = &mut self.stats;
        self.policy.push(id, preferred, |_, spec| {
            spec.key
                .iter()
                .map(|c| match c {
                    KeyComponent::Heuristic(h) => h_of(*h),
                    KeyComponent::Novelty(p) => {
                        let t = partitions.iter().position(|q| q == p).expect("partition registered");
                        *w[t].get_or_insert_with(|| {
                            let key: Vec<u32> = p.iter().map(|&h| h_of(h)).collect();
                            stats.novelty_queries += 1;
                            u32::from(novelty[t].evaluate(&atoms, &key))
                        })
                    }
                    KeyComponent::NotPreferred => u32::from(!preferred),
                    KeyComponent::G => g,
                })
                .collect()
        });
    }

    fn memory_bytes(&self) -> u64 {
        let nodes = (self.nodes.capacity() * std::mem::size_of::<Node>()) as u64;
        let statuses = (self.lm_status.capacity() * std::mem::size_of::<Option<LandmarkStatus>>()) as u64;
        let novelty: u64 = self.novelty.iter().map(NoveltyTable::memory_bytes).sum();
        let open = (self.policy.len() * 32 + self.policy.num_buckets() * 96) as u64;
        self.registry.memory_bytes() + nodes + statuses + self.lm_status_bytes + novelty + open
    }

    fn run(&mut self, start: Instant) -> (Outcome, Option<Vec<usize>>) {
        let limits = self.options.limits;
        let init = self.task.initial_state.clone();
        let (root, _) = match self.registry.register(&init) {
            Ok(r) => r,
            Err(_) => return (Outcome::MemoryLimit, None),
        };
        self.nodes.push(Node {
            parent: NONE,
            op: NONE,
            g: 0,
            status: Status::Generated,
            h_ff: 0,
            h_lm: 0,
            preferred: false,
        });
        self.stats.generated = 1;
        let mut root_eval = self.evaluate(root, &init);
        let Some(root_ff) = root_eval.h_ff else {
            return (Outcome::UnsolvableUnderRelaxation, None);
        };
        self.store_evaluation(root, &mut root_eval);
        let root_lm = root_eval.h_lm;

        let lm_count = self.landmarks.as_ref().map_or(0, LandmarkGraph::len) as u64;
        let ff_bound = 1 + u64::from(root_ff.max(1));
        for p in &self.partitions {
            let bound: u64 = p
                .iter()
                .map(|h| match h {
                    Heuristic::Ff => ff_bound,
                    Heuristic::Lm => lm_count + 1,
                })
                .product();
            self.novelty
                .push(NoveltyTable::new(self.options.novelty_bound, self.task.num_atoms(), bound));
        }
        self.stats.novelty_fallback = self.novelty.iter().any(NoveltyTable::fallback_engaged);

        self.insert(root, &init, (root_ff, root_lm));
        let mut root_eval = Some(root_eval);
        let mut best = (root_ff, root_lm);
        let want_preferred = self.config.uses_preferred();
        let mut values = Vec::new();
        let mut succ = Vec::new();
        let mut applicable = Vec::new();
        let mut preferred_ops = FixedBitSet::with_capacity(self.task.operators.len());

        loop {
            if limits.time.is_some_and(|t| start.elapsed() >= t) {
                return (Outcome::TimeLimit, None);
            }
            let Ok((_, entry)) = self.policy.pop() else {
                return (Outcome::Exhausted, None);
            };
            let id = entry.state;
            if self.nodes[id.index()].status != Status::Generated {
                continue;
            }
            self.registry.lookup(id, &mut values);
            let mut eval = match root_eval.take().filter(|_| id == root) {
                Some(e) => e,
                None => {
                    let mut e = self.evaluate(id, &values);
                    self.store_evaluation(id, &mut e);
                    e
                }
            };
            let Some(h_ff) = eval.h_ff else {
                self.nodes[id.index()].status = Status::Pruned;
                self.stats.pruned += 1;
                continue;
            };
            if self.task.is_goal(&values) {
                return (Outcome::Solved, Some(extract(&self.nodes, id)));
            }
            if limits.max_expansions.is_some_and(|m| self.stats.expansions >= m) {
                return (Outcome::ExpansionLimit, None);
            }
            self.nodes[id.index()].status = Status::Expanded;
            self.stats.expansions += 1;
            if self.options.record_trace {
                self.trace.push(id);
            }
            let h_lm = eval.h_lm;
            let uses_ff = self.config.uses(Heuristic::Ff);
            if (uses_ff && h_ff < best.0) || (self.landmarks.is_some() && h_lm < best.1) {
                best = (best.0.min(h_ff), best.1.min(h_lm));
                if self.policy.boost_amount().is_some() {
                    self.policy.boost();
                    self.stats.boosts += 1;
                }
            }

            self.generator.applicable(&values, &mut applicable);
            preferred_ops.clear();
            if want_preferred {
                for &o in &eval.preferred_ff {
                    preferred_ops.insert(o);
                }
                if let Some(graph) = &self.landmarks {
                    let status = self.lm_status[id.index()].as_ref().expect("evaluated");
                    for o in graph.preferred_operators(status, self.task, &values, &applicable) {
                        preferred_ops.insert(o);
                    }
                }
            }
            eval.preferred_ff.clear();
            let g = self.nodes[id.index()].g;
            for &op in &applicable {
                succ.clear();
                succ.extend_from_slice(&values);
                successor::apply_effects(&self.task.operators[op], &values, &mut succ);
                let (child, is_new) = match self.registry.register(&succ) {
                    Ok(r) => r,
                    Err(_) => return (Outcome::MemoryLimit, None),
                };
                if !is_new {
                    continue;
                }
                self.nodes.push(Node {
                    parent: id.0,
                    op: op as u32,
                    g: g + 1,
                    status: Status::Generated,
                    h_ff: 0,
                    h_lm: 0,
                    preferred: preferred_ops.contains(op),
                });
                self.stats.generated += 1;
                self.insert(child, &succ, (h_ff, h_lm));
            }
            let mem = self.memory_bytes();
            self.stats.peak_memory_bytes = self.stats.peak_memory_bytes.max(mem);
            if mem > self.budget {
                return (Outcome::MemoryLimit, None);
            }
        }
    }
}

/// Resident set size of this process, where the platform reports it.
fn resident_bytes() -> Option<u64> {
    let statm = std::fs::read_to_string("/proc/self/statm").ok()?;
    let pages: u64 = statm.split_whitespace().nth(1)?.parse().ok()?;
    // SAFETY: sysconf has no preconditions.
    let page = unsafe { libc::sysconf(libc::_SC_PAGESIZE) };
    Some(pages * u64::try_from(page).ok()?)
}

/// Runs the deferred-evaluation greedy best-first search for `config`.
pub fn lazy_gbfs(task: &Task, config: &Config, options: &SearchOptions) -> SearchResult {
    let start = Instant::now();
    let relaxed = RelaxedTask::new(task);
    let landmarks = config
        .uses(Heuristic::Lm)
        .then(|| LandmarkGraph::generate(task, &relaxed));
    let budget = options
        .limits
        .memory_bytes
        .saturating_sub(resident_bytes().unwrap_or(0));
    let mut search = Search {
        task,
        config,
        options: *options,
        budget,
        relaxation: DeleteRelaxation::from_relaxed(relaxed),
        stats: Statistics {
            landmarks: landmarks.as_ref().map_or(0, LandmarkGraph::len),
            ..Statistics::default()
        },
        landmarks,
        generator: SuccessorGenerator::new(task),
        registry: StateRegistry::new(task.domain_sizes(), budget),
        nodes: Vec::new(),
        lm_status: Vec::new(),
        lm_status_bytes: 0,
        policy: config.policy(),
        partitions: config.partitions(),
        novelty: Vec::new(),
        trace: Vec::new(),
    };
    let (outcome, plan) = search.run(start);
    let final_bytes = search.memory_bytes();
    let mut stats = search.stats;
    stats.registered = search.registry.len() as u64;
    stats.peak_memory_bytes = stats.peak_memory_bytes.max(final_bytes);
    stats.runtime_s = start.elapsed().as_secs_f64();
    SearchResult {
        outcome,
        plan,
        stats,
        trace: search.trace,
    }
}
