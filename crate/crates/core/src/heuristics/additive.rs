use std::cmp::Reverse;
use std::collections::BinaryHeap;

use fixedbitset::FixedBitSet;

use super::relaxed::RelaxedTask;
use crate::sas::Task;
use crate::search::successor::is_applicable;

const UNREACHED: u64 = u64::MAX;
const NO_SUPPORTER: u32 = u32::MAX;

/// Result of one h^FF evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeuristicReport {
    /// `None` when some goal atom is not relaxed-reachable.
    pub value: Option<u32>,
    /// Sorted original operator indices of the relaxed plan.
    pub relaxed_plan: Vec<usize>,
    /// Relaxed-plan operators applicable in the evaluated state (helpful actions).
    pub preferred: Vec<usize>,
}

/// h^add and h^FF over unit costs. Scratch buffers are reused between calls.
pub struct DeleteRelaxation {
    relaxed: RelaxedTask,
    cost: Vec<u64>,
    supporter: Vec<u32>,
    unsat: Vec<u32>,
    op_cost: Vec<u64>,
    heap: BinaryHeap<Reverse<(u64, u32)>>,
    settled: FixedBitSet,
    goal_atoms: FixedBitSet,
    marked: FixedBitSet,
    in_plan: FixedBitSet,
}

impl DeleteRelaxation {
    pub fn new(task: &Task) -> Self {
        Self::from_relaxed(RelaxedTask::new(task))
    }

    pub fn from_relaxed(relaxed: RelaxedTask) -> Self {
        let atoms = relaxed.num_atoms();
        let ops = relaxed.ops.len();
        DeleteRelaxation {
            cost: vec![UNREACHED; atoms],
            supporter: vec![NO_SUPPORTER; atoms],
            unsat: vec![0; ops],
            op_cost: vec![0; ops],
            heap: BinaryHeap::new(),
            settled: FixedBitSet::with_capacity(atoms),
            goal_atoms: relaxed.goal.iter().map(|&g| g as usize).collect(),
            marked: FixedBitSet::with_capacity(atoms),
            in_plan: FixedBitSet::with_capacity(ops),
            relaxed,
        }
    }

    pub fn relaxed(&self) -> &RelaxedTask {
        &self.relaxed
    }

    fn enable(&mut self, r: usize) {
        let c = self.op_cost[r];
        let add = self.relaxed.ops[r].add as usize;
        if c < self.cost[add] {
            self.cost[add] = c;
            self.supporter[add] = r as u32;
            self.heap.push(Reverse((c, add as u32)));
        } else if c == self.cost[add] && (r as u32) < self.supporter[add] {
            self.supporter[add] = r as u32;
        }
    }

    /// Dijkstra-style additive cost propagation; stops once all goal atoms
    /// are settled. Returns the h^add value.
    fn propagate(&mut self, task: &Task, state: &[usize]) -> Option<u64> {
        self.cost.fill(UNREACHED);
        self.supporter.fill(NO_SUPPORTER);
        self.heap.clear();
        for (r, op) in self.relaxed.ops.iter().enumerate() {
            self.unsat[r] = op.pre.len() as u32;
            self.op_cost[r] = 1;
        }
        for (v, &x) in state.iter().enumerate() {
            let a = task.atoms().offset(v) + x;
            self.cost[a] = 0;
            self.heap.push(Reverse((0, a as u32)));
        }
        for r in 0..self.relaxed.ops.len() {
            if self.unsat[r] == 0 {
                self.enable(r);
            }
        }
        let mut goals_left = self.relaxed.goal.len();
        self.settled.clear();
        while let Some(Reverse((c, a))) = self.heap.pop() {
            if c > self.cost[a as usize] || self.settled.put(a as usize) {
                continue;
            }
            if self.goal_atoms.contains(a as usize) {
                goals_left -= 1;
                if goals_left == 0 {
                    break;
                }
            }
            for i in 0..self.relaxed.precondition_of[a as usize].len() {
                let r = self.relaxed.precondition_of[a as usize][i] as usize;
                self.unsat[r] -= 1;
                self.op_cost[r] = self.op_cost[r].saturating_add(c);
                if self.unsat[r] == 0 {
                    self.enable(r);
                }
            }
        }
        let mut total = 0u64;
        for &g in &self.relaxed.goal {
            let c = self.cost[g as usize];
            if c == UNREACHED {
                return None;
            }
            total = total.saturating_add(c);
        }
        Some(total)
    }

    /// h^add; `None` means a goal atom is relaxed-unreachable.
    pub fn hadd(&mut self, task: &Task, state: &[usize]) -> Option<u64> {
        self.propagate(task, state)
    }

    /// h^FF with helpful actions. The relaxed plan is read off the h^add best
    /// supporters (ties to the lowest relaxed-operator index).
    pub fn hff(&mut self, task: &Task, state: &[usize]) -> HeuristicReport {
        if self.propagate(task, state).is_none() {
            return HeuristicReport::default();
        }
        self.marked.clear();
        self.in_plan.clear();
        let mut stack: Vec<u32> = self
            .relaxed
            .goal
            .iter()
            .copied()
            .filter(|&g| self.cost[g as usize] > 0)
            .collect();
        for &g in &stack {
            self.marked.insert(g as usize);
        }
        let mut plan_ops = Vec::new();
        while let Some(a) = stack.pop() {
            let r = self.supporter[a as usize] as usize;
            let rop = &self.relaxed.ops[r];
            if !self.in_plan.put(rop.op as usize) {
                plan_ops.push(rop.op as usize);
            }
            for &p in &rop.pre {
                if self.cost[p as usize] > 0 && !self.marked.put(p as usize) {
                    stack.push(p);
                }
            }
        }
        plan_ops.sort_unstable();
        let preferred = plan_ops
            .iter()
            .copied()
            .filter(|&o| is_applicable(&task.operators[o], state))
            .collect();
        HeuristicReport {
            value: Some(plan_ops.len() as u32),
            relaxed_plan: plan_ops,
            preferred,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sas::parse_sas;

    #[test]
    fn chain_values() {
        let task = parse_sas(include_str!("../../tests/data/chain.sas")).unwrap();
        let mut h = DeleteRelaxation::new(&task);
        assert_eq!(h.hadd(&task, &[0]), Some(2));
        assert_eq!(h.hadd(&task, &[2]), Some(0));
        let r = h.hff(&task, &[0]);
        assert_eq!(r.value, Some(2));
        assert_eq!(r.relaxed_plan, vec![0, 1]);
        assert_eq!(r.preferred, vec![0]);
        let r = h.hff(&task, &[2]);
        assert_eq!(r, HeuristicReport { value: Some(0), ..Default::default() });
    }

    #[test]
    fn pair_values() {
        let task = parse_sas(include_str!("../../tests/data/pair.sas")).unwrap();
        let mut h = DeleteRelaxation::new(&task);
        assert_eq!(h.hadd(&task, &[0, 0]), Some(2));
        let r = h.hff(&task, &[0, 0]);
        assert_eq!(r.value, Some(2));
        assert_eq!(r.preferred, vec![0, 1]);
    }

    #[test]
    fn dead_end() {
        let task = parse_sas(include_str!("../../tests/data/chain_unsolvable.sas")).unwrap();
        let mut h = DeleteRelaxation::new(&task);
        assert_eq!(h.hadd(&task, &[0]), None);
        assert_eq!(h.hff(&task, &[0]).value, None);
    }
}
