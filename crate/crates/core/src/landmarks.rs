//! Fact landmarks of the delete relaxation and the landmark-count heuristic.
//!
//! Generation backchains from the goal atoms. For a candidate `L` that is false
//! initially, the first achievers of `L` are the relaxed operators adding `L`
//! that become applicable in a relaxed exploration where `L` is never added.
//! Every atom shared by the preconditions of all first achievers is a landmark
//! ordered greedy-necessarily before `L`. Atoms true in the initial state are
//! only kept when they are goal atoms. Each landmark is finally checked by
//! removing all of its achievers and confirming that the goal becomes
//! relaxed-unreachable.
//!
//! Status bookkeeping keeps a monotone *reached* set per state. A goal landmark
//! that was reached but is false in the current state is required again and
//! does not count as accepted.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use crate::heuristics::RelaxedTask;
use crate::sas::{Fact, Task};
use crate::search::successor::is_applicable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Landmark {
    pub fact: Fact,
    pub atom: u32,
    pub is_goal: bool,
    /// Greedy-necessary parents, as landmark indices.
    pub parents: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkGraph {
    pub landmarks: Vec<Landmark>,
    by_atom: HashMap<u32, usize>,
}

/// Reached landmarks along the path to one state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkStatus {
    pub reached: FixedBitSet,
}

impl LandmarkStatus {
    pub fn empty(graph: &LandmarkGraph) -> Self {
        LandmarkStatus {
            reached: FixedBitSet::with_capacity(graph.len()),
        }
    }

    pub fn memory_bytes(&self) -> usize {
        std::mem::size_of_val(self.reached.as_slice()) + std::mem::size_of::<Self>()
    }
}

fn state_atoms<'a>(task: &'a Task, state: &'a [usize]) -> impl Iterator<Item = u32> + 'a {
    state
        .iter()
        .enumerate()
        .map(move |(v, &x)| (task.atoms().offset(v) + x) as u32)
}

/// Removal test: is the goal relaxed-unreachable once every achiever of `atom`
/// is dropped? Goal atoms true initially pass trivially.
pub fn passes_removal_test(task: &Task, relaxed: &RelaxedTask, atom: u32) -> bool {
    let init: Vec<u32> = state_atoms(task, &task.initial_state).collect();
    if init.contains(&atom) {
        return relaxed.goal.contains(&atom);
    }
    let reached = relaxed.reachable(init, |r| relaxed.ops[r as usize].add == atom);
    !relaxed.goal_reachable(&reached)
}

impl LandmarkGraph {
    pub fn generate(task: &Task, relaxed: &RelaxedTask) -> Self {
        let init: Vec<u32> = state_atoms(task, &task.initial_state).collect();
        let mut init_set = FixedBitSet::with_capacity(task.num_atoms());
        init.iter().for_each(|&a| init_set.insert(a as usize));
        let goal_set: FixedBitSet = relaxed.goal.iter().map(|&g| g as usize).collect();

        let mut atoms: Vec<u32> = Vec::new();
        let mut index: HashMap<u32, usize> = HashMap::new();
        let mut orderings: Vec<(usize, usize)> = Vec::new();
        let mut queue = VecDeque::new();
        for &g in &relaxed.goal {
            index.insert(g, atoms.len());
            atoms.push(g);
            queue.push_back(g);
        }

        let goal_reachable = relaxed.goal_reachable(&relaxed.reachable(init.iter().copied(), |_| false));
        while let Some(lm) = queue.pop_front() {
            if !goal_reachable || init_set.contains(lm as usize) {
                continue;
            }
            let reached = relaxed.reachable(init.iter().copied(), |r| relaxed.ops[r as usize].add == lm);
            let mut shared: Option<Vec<u32>> = None;
            for &r in &relaxed.achievers[lm as usize] {
                let op = &relaxed.ops[r as usize];
                if !op.pre.iter().all(|&p| reached.contains(p as usize)) {
                    continue;
                }
                shared = Some(match shared {
                    None => op.pre.clone(),
                    Some(s) => s.into_iter().filter(|p| op.pre.binary_search(p).is_ok()).collect(),
                });
            }
            let child = index[&lm];
            for p in shared.unwrap_or_default() {
                if init_set.contains(p as usize) && !goal_set.contains(p as usize) {
                    continue;
                }
                let parent = *index.entry(p).or_insert_with(|| {
                    atoms.push(p);
                    queue.push_back(p);
                    atoms.len() - 1
                });
                orderings.push((parent, child));
            }
        }

        let keep: Vec<bool> = atoms
            .iter()
            .map(|&a| !goal_reachable || passes_removal_test(task, relaxed, a))
            .collect();
        let mut remap = vec![usize::MAX; atoms.len()];
        let mut landmarks = Vec::new();
        for (i, &a) in atoms.iter().enumerate() {
            if keep[i] {
                remap[i] = landmarks.len();
                landmarks.push(Landmark {
                    fact: task.atoms().fact(a as usize),
                    atom: a,
                    is_goal: goal_set.contains(a as usize),
                    parents: Vec::new(),
                });
            }
        }
        for (p, c) in orderings {
            if keep[p] && keep[c] {
                landmarks[remap[c]].parents.push(remap[p]);
            }
        }
        for lm in &mut landmarks {
            lm.parents.sort_unstable();
            lm.parents.dedup();
        }
        let by_atom = landmarks.iter().enumerate().map(|(i, l)| (l.atom, i)).collect();
        LandmarkGraph { landmarks, by_atom }
    }

    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }

    pub fn index_of(&self, fact: Fact, task: &Task) -> Option<usize> {
        self.by_atom.get(&(task.atoms().id(fact) as u32)).copied()
    }

    pub fn orderings(&self) -> Vec<(usize, usize)> {
        self.landmarks
            .iter()
            .enumerate()
            .flat_map(|(c, l)| l.parents.iter().map(move |&p| (p, c)))
            .collect()
    }

    /// Status of `state` reached from a parent with `parent` status, and the
    /// landmark-count value of that status.
    pub fn evaluate(&self, parent: &LandmarkStatus, state: &[usize]) -> (u32, LandmarkStatus) {
        let mut reached = parent.reached.clone();
        for (i, lm) in self.landmarks.iter().enumerate() {
            if !reached.contains(i)
                && state[lm.fact.var] == lm.fact.value
                && lm.parents.iter().all(|&p| parent.reached.contains(p))
            {
                reached.insert(i);
            }
        }
        let status = LandmarkStatus { reached };
        (self.value(&status, state), status)
    }

    pub fn is_accepted(&self, status: &LandmarkStatus, state: &[usize], i: usize) -> bool {
        let lm = &self.landmarks[i];
        status.reached.contains(i) && !(lm.is_goal && state[lm.fact.var] != lm.fact.value)
    }

    pub fn value(&self, status: &LandmarkStatus, state: &[usize]) -> u32 {
        (0..self.len()).filter(|&i| !self.is_accepted(status, state, i)).count() as u32
    }

    /// Applicable operators with an effect (whose condition holds) that achieves
    /// an unaccepted landmark all of whose parents are reached.
    pub fn preferred_operators(
        &self,
        status: &LandmarkStatus,
        task: &Task,
        state: &[usize],
        applicable: &[usize],
    ) -> Vec<usize> {
        let wanted: FixedBitSet = (0..self.len())
            .filter(|&i| {
                !self.is_accepted(status, state, i)
                    && self.landmarks[i].parents.iter().all(|&p| status.reached.contains(p))
            })
            .collect();
        applicable
            .iter()
            .copied()
            .filter(|&o| {
                let op = &task.operators[o];
                debug_assert!(is_applicable(op, state));
                op.effects.iter().any(|e| {
                    e.conditions.iter().all(|c| state[c.var] == c.value)
                        && self
                            .index_of(Fact::new(e.var, e.value), task)
                            .is_some_and(|i| wanted.contains(i))
                })
            })
            .collect()
    }

    /// One landmark per line: `var=val [goal] parents: ...`.
    pub fn dump(&self, task: &Task) -> String {
        let mut out = String::new();
        for lm in &self.landmarks {
            let _ = write!(out, "{}", task.fact_name(lm.fact));
            if lm.is_goal {
                let _ = write!(out, " [goal]");
            }
            let _ = write!(out, " parents:");
            for &p in &lm.parents {
                let _ = write!(out, " {}", task.fact_name(self.landmarks[p].fact));
            }
            out.push('\n');
        }
        out
    }
}
