//! Random tasks and reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use nolan::sas::{Effect, Fact, Operator, Variable};
use nolan::{parse_sas, Task};

pub const CHAIN: &str = include_str!("../data/chain.sas");
pub const CHAIN_UNSOLVABLE: &str = include_str!("../data/chain_unsolvable.sas");
pub const PAIR: &str = include_str!("../data/pair.sas");

pub fn fixtures() -> Vec<(&'static str, Task)> {
    vec![
        ("chain", parse_sas(CHAIN).unwrap()),
        ("chain_unsolvable", parse_sas(CHAIN_UNSOLVABLE).unwrap()),
        ("pair", parse_sas(PAIR).unwrap()),
    ]
}

fn distinct_vars(rng: &mut StdRng, n: usize, count: std::ops::RangeInclusive<usize>) -> Vec<usize> {
    let k = rng.gen_range(count);
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    vars.truncate(k.min(n));
    vars.sort_unstable();
    vars
}

/// Up to 6 variables of domain 2..=4 and up to 12 operators, some with
/// conditional effects. The goal never holds initially.
pub fn random_task(rng: &mut StdRng) -> Task {
    let n = rng.gen_range(1..=6);
    let variables: Vec<Variable> = (0..n)
        .map(|v| Variable {
            name: format!("var{v}"),
            axiom_layer: -1,
            value_names: (0..rng.gen_range(2..=4)).map(|x| format!("Atom v{v}({x})")).collect(),
        })
        .collect();
    let dom = |v: usize| variables[v].domain_size();
    let num_ops = rng.gen_range(6..=12);
    let mut operators = Vec::new();
    for o in 0..num_ops {
        // mostly value transitions `v: x -> y`, with an optional prevail
        // condition and an optional second (possibly conditional) effect
        let eff_vars = distinct_vars(rng, n, 1..=2);
        let mut preconditions = Vec::new();
        let mut effects = Vec::new();
        for (i, &v) in eff_vars.iter().enumerate() {
            let y = rng.gen_range(0..dom(v));
            if rng.gen_bool(0.7) {
                preconditions.push(Fact::new(v, (y + rng.gen_range(1..dom(v))) % dom(v)));
            }
            let mut conditions = Vec::new();
            if i > 0 && rng.gen_bool(0.4) {
                let c = rng.gen_range(0..n);
                if !preconditions.iter().any(|p: &Fact| p.var == c) {
                    conditions.push(Fact::new(c, rng.gen_range(0..dom(c))));
                }
            }
            effects.push(Effect {
                conditions,
                var: v,
                value: y,
            });
        }
        if rng.gen_bool(0.5) {
            let c = rng.gen_range(0..n);
            if !preconditions.iter().any(|p| p.var == c) {
                preconditions.push(Fact::new(c, rng.gen_range(0..dom(c))));
            }
        }
        preconditions.sort();
        operators.push(Operator {
            name: format!("op{o}"),
            preconditions,
            effects,
            cost: 1,
        });
    }
    let initial_state: Vec<usize> = (0..n).map(|v| rng.gen_range(0..dom(v))).collect();
    // most goals are taken from the end of a random walk
    let mut end = initial_state.clone();
    if rng.gen_bool(0.8) {
        for _ in 0..rng.gen_range(2..=10) {
            let ops: Vec<&Operator> = operators.iter().filter(|o| applicable(o, &end)).collect();
            let Some(op) = ops.choose(rng) else { break };
            end = apply(op, &end);
        }
    } else {
        end = (0..n).map(|v| rng.gen_range(0..dom(v))).collect();
    }
    let mut goal_vars: Vec<usize> = (0..n).filter(|&v| end[v] != initial_state[v]).collect();
    if goal_vars.is_empty() {
        return random_task(rng);
    }
    goal_vars.shuffle(rng);
    goal_vars.truncate(rng.gen_range(1..=3));
    let goal = goal_vars.into_iter().map(|v| Fact::new(v, end[v])).collect();
    Task::new(variables, operators, initial_state, goal, false, Vec::new()).unwrap()
}

/// Random tasks where relaxed reachability of the goal implies solvability.
pub fn suite(seed: u64, count: usize) -> Vec<Task> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let task = random_task(&mut rng);
        let relaxed_ok = naive_hadd(&task, &task.initial_state).is_some();
        if relaxed_ok == bfs_plan(&task).is_some() {
            out.push(task);
        }
    }
    out
}

pub fn applicable(op: &Operator, s: &[usize]) -> bool {
    op.preconditions.iter().all(|f| s[f.var] == f.value)
}

pub fn apply(op: &Operator, s: &[usize]) -> Vec<usize> {
    let mut t = s.to_vec();
    for e in &op.effects {
        if e.conditions.iter().all(|c| s[c.var] == c.value) {
            t[e.var] = e.value;
        }
    }
    t
}

fn is_goal(task: &Task, s: &[usize]) -> bool {
    task.goal.iter().all(|f| s[f.var] == f.value)
}

/// Shortest plan by breadth-first search.
pub fn bfs_plan(task: &Task) -> Option<Vec<usize>> {
    let init = task.initial_state.clone();
    let mut parent: HashMap<Vec<usize>, Option<(Vec<usize>, usize)>> = HashMap::new();
    parent.insert(init.clone(), None);
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        if is_goal(task, &s) {
            let mut plan = Vec::new();
            let mut cur = s;
            while let Some((p, o)) = parent[&cur].clone() {
                plan.push(o);
                cur = p;
            }
            plan.reverse();
            return Some(plan);
        }
        for (o, op) in task.operators.iter().enumerate() {
            if applicable(op, &s) {
                let t = apply(op, &s);
                if !parent.contains_key(&t) {
                    parent.insert(t.clone(), Some((s.clone(), o)));
                    queue.push_back(t);
                }
            }
        }
    }
    None
}

/// All states reachable from the initial state, in BFS order.
pub fn reachable_states(task: &Task, cap: usize) -> Vec<Vec<usize>> {
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([task.initial_state.clone()]);
    seen.insert(task.initial_state.clone());
    while let Some(s) = queue.pop_front() {
        order.push(s.clone());
        if order.len() >= cap {
            break;
        }
        for op in &task.operators {
            if applicable(op, &s) {
                let t = apply(op, &s);
                if seen.insert(t.clone()) {
                    queue.push_back(t);
                }
            }
        }
    }
    order
}

fn relaxed_ops(task: &Task) -> Vec<(Vec<Fact>, Fact)> {
    task.operators
        .iter()
        .flat_map(|op| {
            op.effects.iter().map(move |e| {
                let mut pre: Vec<Fact> = op.preconditions.iter().chain(&e.conditions).copied().collect();
                pre.sort();
                pre.dedup();
                (pre, Fact::new(e.var, e.value))
            })
        })
        .collect()
}

/// h^add by iterating the cost equations to a fixed point.
pub fn naive_hadd(task: &Task, s: &[usize]) -> Option<u64> {
    let mut cost: HashMap<Fact, u64> = s.iter().enumerate().map(|(v, &x)| (Fact::new(v, x), 0)).collect();
    let ops = relaxed_ops(task);
    loop {
        let mut changed = false;
        for (pre, add) in &ops {
            let Some(c) = pre.iter().map(|p| cost.get(p).copied()).sum::<Option<u64>>() else {
                continue;
            };
            let c = c + 1;
            if cost.get(add).is_none_or(|&old| c < old) {
                cost.insert(*add, c);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    task.goal.iter().map(|g| cost.get(g).copied()).sum()
}

/// Facts reachable under delete-free semantics, never adding `blocked`.
pub fn relaxed_closure(task: &Task, start: &[usize], blocked: Option<Fact>) -> HashSet<Fact> {
    let mut reached: HashSet<Fact> = start.iter().enumerate().map(|(v, &x)| Fact::new(v, x)).collect();
    let ops = relaxed_ops(task);
    loop {
        let before = reached.len();
        for (pre, add) in &ops {
            if Some(*add) != blocked && pre.iter().all(|p| reached.contains(p)) {
                reached.insert(*add);
            }
        }
        if reached.len() == before {
            return reached;
        }
    }
}

/// Whether `fact` holds at some point of every relaxed plan.
pub fn is_relaxed_landmark(task: &Task, fact: Fact) -> bool {
    if task.initial_state[fact.var] == fact.value {
        return true;
    }
    let reached = relaxed_closure(task, &task.initial_state, Some(fact));
    !task.goal.iter().all(|g| reached.contains(g))
}

/// Executes the operators of a relaxed plan under delete-free semantics until
/// nothing changes; returns whether all goal facts were reached.
pub fn relaxed_replay_reaches_goal(task: &Task, s: &[usize], plan: &[usize]) -> bool {
    let mut reached: HashSet<Fact> = s.iter().enumerate().map(|(v, &x)| Fact::new(v, x)).collect();
    loop {
        let before = reached.len();
        for &o in plan {
            let op = &task.operators[o];
            if op.preconditions.iter().all(|p| reached.contains(p)) {
                for e in &op.effects {
                    if e.conditions.iter().all(|c| reached.contains(c)) {
                        reached.insert(Fact::new(e.var, e.value));
                    }
                }
            }
        }
        if reached.len() == before {
            break;
        }
    }
    task.goal.iter().all(|g| reached.contains(g))
}

/// Novelty straight from the definition: the size of the smallest tuple of
/// `atoms` not contained in any earlier state with the same key, or `k + 1`.
#[derive(Default)]
pub struct NoveltyOracle {
    seen: HashMap<Vec<u32>, Vec<Vec<usize>>>,
}

impl NoveltyOracle {
    pub fn query(&mut self, k: u8, atoms: &[usize], key: &[u32]) -> u8 {
        let past = self.seen.entry(key.to_vec()).or_default();
        let covered = |tuple: &[usize]| past.iter().any(|p| tuple.iter().all(|a| p.contains(a)));
        let mut w = k + 1;
        if atoms.iter().any(|&a| !covered(&[a])) {
            w = 1;
        } else if k >= 2 {
            'outer: for (i, &a) in atoms.iter().enumerate() {
                for &b in &atoms[i + 1..] {
                    if !covered(&[a, b]) {
                        w = 2;
                        break 'outer;
                    }
                }
            }
        }
        past.push(atoms.to_vec());
        w
    }
}

/// Sorted atom ids of a state.
pub fn state_atoms(task: &Task, s: &[usize]) -> Vec<usize> {
    s.iter().enumerate().map(|(v, &x)| task.atoms().id(Fact::new(v, x))).collect()
}

/// Text of a large task for the memory tests: 1000 variables of domain 100.
/// Variable 0 is a lock that each of the 299 goal-setting operators needs free
/// and then takes, so only one goal can ever be reached; the remaining
/// variables count upwards and blow up the state space.
pub fn lock_task_text() -> String {
    use std::fmt::Write as _;
    const VARS: usize = 1000;
    const DOM: usize = 100;
    const GOALS: usize = 299;
    let mut out = String::from("begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n");
    let _ = writeln!(out, "{VARS}");
    for v in 0..VARS {
        let _ = writeln!(out, "begin_variable\nvar{v}\n-1\n{DOM}");
        for x in 0..DOM {
            let _ = writeln!(out, "Atom v{v}({x})");
        }
        out.push_str("end_variable\n");
    }
    out.push_str("0\nbegin_state\n");
    for _ in 0..VARS {
        out.push_str("0\n");
    }
    out.push_str("end_state\nbegin_goal\n");
    let _ = writeln!(out, "{GOALS}");
    for v in 1..=GOALS {
        let _ = writeln!(out, "{v} 1");
    }
    out.push_str("end_goal\n");
    let _ = writeln!(out, "{}", GOALS + (VARS - GOALS - 1) * (DOM - 1));
    for v in 1..=GOALS {
        let _ = writeln!(out, "begin_operator\nset{v}\n0\n2\n0 0 0 1\n0 {v} 0 1\n1\nend_operator");
    }
    for v in GOALS + 1..VARS {
        for x in 0..DOM - 1 {
            let _ = writeln!(out, "begin_operator\ninc{v}_{x}\n0\n1\n0 {v} {x} {}\n1\nend_operator", x + 1);
        }
    }
    out.push_str("0\n");
    out
}
